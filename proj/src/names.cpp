// Synthetic stand-ins for the process-name and domain-name corpora.
//
// Process names come in families: one stem with several variants (bitness,
// helper suffixes, version numbers, .exe/.dll), mimicking the versioned
// clusters found in software distributions. Domain names are short token
// compounds under a handful of TLDs.

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <unordered_set>
#include <vector>

#include "homoglyph/corpus.hpp"
#include "homoglyph/errors.hpp"

namespace homoglyph {

namespace {

constexpr std::array kProcessSeeds = {
    "svchost.exe",  "lsass.exe",    "iexplore.exe", "explorer.exe", "chtime.exe",
    "winlogon.exe", "csrss.exe",    "services.exe", "spoolsv.exe",  "taskhost.exe",
    "rundll32.exe", "notepad.exe",  "conhost.exe",  "dllhost.exe",  "smss.exe",
    "kernel32.dll", "user32.dll",   "advapi32.dll", "shell32.dll",  "msvcrt.dll",
};

constexpr std::array kProcessTokens = {
    "svc",   "host",  "win",   "sys",    "net",   "srv",   "mgr",    "log",   "ctl",   "cfg",
    "app",   "data",  "core",  "sec",    "auth",  "updt",  "print",  "spool", "audio", "disk",
    "crypt", "shell", "task",  "sched",  "dll",   "run",   "conf",   "dev",   "mon",   "agent",
    "sync",  "help",  "setup", "inst",   "load",  "boot",  "diag",   "perf",  "user",  "term",
    "kern",  "prov",  "cert",  "wmi",    "ras",   "tapi",  "rpc",    "lsa",   "sam",   "ntds",
    "media", "video", "disp",  "input",  "font",  "image", "scan",   "fax",   "mail",  "web",
    "java",  "node",  "py",    "ruby",   "perl",  "tcl",   "go",     "rust",  "gcc",   "make",
    "zip",   "rar",   "tar",   "backup", "store", "cache", "proxy",  "vpn",   "fire",  "wall",
    "guard", "scout", "pilot", "edge",   "chrome", "office", "excel", "word", "point", "team",
};

constexpr std::array kVariantSuffixes = {"", "", "w", "x", "ex", "ui", "32", "64"};
constexpr std::array kVersions = {"", "", "1", "2", "3", "4"};

constexpr std::array kDomainTokens = {
    "bank",   "mail",   "shop",   "cloud",  "news",   "secure", "pay",    "login",  "my",     "get",
    "best",   "online", "store",  "web",    "tech",   "data",   "home",   "travel", "food",   "music",
    "game",   "photo",  "video",  "book",   "social", "live",   "smart",  "fast",   "global", "city",
    "google", "face",   "twitter", "snap",  "chat",   "amazon", "paypal", "apple",  "micro",  "soft",
    "net",    "link",   "hub",    "zone",   "box",    "drive",  "click",  "deal",   "market", "trade",
    "health", "care",   "auto",   "car",    "job",    "work",   "team",   "sport",  "play",   "kid",
    "star",   "sun",    "moon",   "blue",   "red",    "green",  "gold",   "open",   "free",   "easy",
    "pro",    "plus",   "one",    "go",     "up",     "top",    "first",  "prime",  "sky",    "sea",
    "wiki",   "blog",   "forum",  "search", "find",   "map",    "ticket", "hotel",  "flight", "rent",
    "tv",     "radio",  "film",   "art",    "design", "print",  "code",   "dev",    "app",    "lab",
};

constexpr std::array kTlds = {".com", ".com", ".com", ".net", ".org", ".io",
                              ".co",  ".de",  ".info", ".biz", ".us", ".uk"};

template <typename Array>
const char* pick(const Array& arr, Rng& rng) {
  return arr[uniform_index(rng, arr.size())];
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string process_stem(Rng& rng) {
  std::string stem = pick(kProcessTokens, rng);
  while (stem.size() < 4 || (stem.size() < 9 && uniform_unit(rng) < 0.5)) stem += pick(kProcessTokens, rng);
  return stem;
}

}  // namespace

std::vector<std::string> synthesize_process_names(std::size_t count, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x70726f63));
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto add = [&](const std::string& name) {
    if (out.size() < count && seen.insert(name).second) out.push_back(name);
  };
  for (const char* s : kProcessSeeds) add(s);

  std::size_t stalls = 0;
  while (out.size() < count) {
    const std::size_t before = out.size();
    const std::string stem = process_stem(rng);
    const bool caps = stem.size() <= 8 && uniform_unit(rng) < 0.15;
    const auto family = static_cast<std::size_t>(uniform_int(rng, 4, 14));
    const char* ext = uniform_unit(rng) < 0.6 ? ".exe" : ".dll";
    for (std::size_t k = 0; k < family * 3 && out.size() - before < family; ++k) {
      std::string name = stem + pick(kVariantSuffixes, rng) + pick(kVersions, rng);
      name += uniform_unit(rng) < 0.9 ? ext : (ext[1] == 'e' ? ".dll" : ".exe");
      add(caps ? upper(name) : name);
    }
    stalls = out.size() == before ? stalls + 1 : 0;
    if (stalls > 10000) throw InsufficientNames("process name space exhausted");
  }
  return out;
}

std::vector<std::string> synthesize_domain_names(std::size_t count, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x646f6d61));
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::size_t stalls = 0;
  while (out.size() < count) {
    std::string name = pick(kDomainTokens, rng);
    const double r = uniform_unit(rng);
    if (r < 0.30) {
      name += pick(kDomainTokens, rng);
    } else if (r < 0.40) {
      name += std::string("-") + pick(kDomainTokens, rng);
    } else if (r < 0.55) {
      name += std::to_string(uniform_int(rng, 1, 99));
    } else if (r < 0.60) {
      name += pick(kDomainTokens, rng);
      name += pick(kDomainTokens, rng);
    }
    name += uniform_unit(rng) < 0.5 ? ".com" : pick(kTlds, rng);
    if (name.size() > 22) continue;
    if (seen.insert(name).second) {
      out.push_back(name);
      stalls = 0;
    } else if (++stalls > 100000) {
      throw InsufficientNames("domain name space exhausted");
    }
  }
  return out;
}

}  // namespace homoglyph
