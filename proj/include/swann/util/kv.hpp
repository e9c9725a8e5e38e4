#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace swann {

// Plain `key = value` config files; '#' starts a comment.
class KvFile {
public:
  KvFile() = default;

  static KvFile parse_text(const std::string& text);
  static KvFile parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : it->second;
  }
  double get(const std::string& key, double dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : std::stod(it->second);
  }
  int64_t get(const std::string& key, int64_t dflt) const {
    auto it = values_.find(key);
    return it == values_.end() ? dflt : std::stoll(it->second);
  }
  int get(const std::string& key, int dflt) const {
    return static_cast<int>(get(key, static_cast<int64_t>(dflt)));
  }
  bool get(const std::string& key, bool dflt) const {
    auto it = values_.find(key);
    if (it == values_.end()) return dflt;
    return it->second == "1" || it->second == "true" || it->second == "on";
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }
  template <class T>
  void set_num(const std::string& key, T value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    values_[key] = os.str();
  }

  // canonical text: sorted keys, one per line
  std::string serialize() const;
  // FNV-1a over the canonical text; embedded in output files
  uint64_t hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

}  // namespace swann
