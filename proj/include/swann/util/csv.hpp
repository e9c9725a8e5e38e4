#pragma once

#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swann {

class CsvWriter {
public:
  CsvWriter(const std::string& path, const std::vector<std::string>& cols,
            uint64_t config_hash = 0) {
    f_ = std::fopen(path.c_str(), "wb");
    if (!f_) throw std::runtime_error("cannot open " + path);
    if (config_hash)
      std::fprintf(f_, "# config_hash=%016llx\n",
                   static_cast<unsigned long long>(config_hash));
    for (size_t i = 0; i < cols.size(); ++i)
      std::fprintf(f_, "%s%s", cols[i].c_str(),
                   i + 1 < cols.size() ? "," : "\n");
  }
  ~CsvWriter() {
    if (f_) std::fclose(f_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(std::span<const double> vals) {
    for (size_t i = 0; i < vals.size(); ++i)
      std::fprintf(f_, "%.10g%s", vals[i], i + 1 < vals.size() ? "," : "\n");
  }
  void flush() { std::fflush(f_); }

private:
  std::FILE* f_ = nullptr;
};

}  // namespace swann
