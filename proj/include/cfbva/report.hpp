#ifndef CFBVA_REPORT_HPP
#define CFBVA_REPORT_HPP

#include <initializer_list>
#include <json.hpp>
#include <ostream>
#include <string>
#include <variant>

namespace cfbva {

// 17 significant digits; NaN and infinities become `null` (JSON) or empty (CSV).
std::string format_number(double x);

// Canonical JSON text: sorted keys, two-space indent, fixed number format,
// trailing newline. Equal documents give equal bytes.
std::string dump_report(const nlohmann::json& document);

using CsvCell = std::variant<double, long long, std::string>;

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::initializer_list<std::string> header);
  void row(std::initializer_list<CsvCell> cells);

 private:
  std::ostream& os_;
  std::size_t columns_;
};

}  // namespace cfbva

#endif
