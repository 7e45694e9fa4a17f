#pragma once
// Report type shared by all checkers.  A report is an ordered list of named
// checks with pass/fail status and an optional witness string; checkers add
// items in a deterministic order so that reports are bit-stable across runs.

#include <sstream>
#include <string>
#include <vector>

namespace ainfty {

struct CheckItem {
  std::string name;
  bool pass = false;
  std::string detail;  // witness / context for failures, empty when passing
};

struct Report {
  std::vector<CheckItem> items;

  void add(std::string name, bool pass, std::string detail = "") {
    items.push_back(CheckItem{std::move(name), pass, std::move(detail)});
  }
  void merge(const Report& other) {
    items.insert(items.end(), other.items.begin(), other.items.end());
  }
  bool all_pass() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }
  size_t num_failed() const {
    size_t k = 0;
    for (const auto& it : items)
      if (!it.pass) ++k;
    return k;
  }
  std::string to_string() const {
    std::ostringstream os;
    for (const auto& it : items) {
      os << (it.pass ? "PASS" : "FAIL") << "  " << it.name;
      if (!it.detail.empty()) os << "  [" << it.detail << "]";
      os << "\n";
    }
    os << (all_pass() ? "all checks passed" : "FAILURES: ")
       << (all_pass() ? std::string() : std::to_string(num_failed()) + " of " + std::to_string(items.size()))
       << "\n";
    return os.str();
  }
};

}  // namespace ainfty
