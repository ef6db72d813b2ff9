#include "cfbva/report.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cfbva {

using nlohmann::json;

namespace {

void quote(std::string& out, const std::string& s) {
  out += json(s).dump();
}

void emit(std::string& out, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // object_t is an ordered map, so iteration is already sorted by key.
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        quote(out, it.key());
        out += ": ";
        emit(out, it.value(), indent + 2);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(out, j[i], indent + 2);
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + "]";
      return;
    }
    case json::value_t::number_float:
      out += format_number(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  if (x == 0.0) return "0";  // also folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_report(const json& document) {
  std::string out;
  emit(out, document, 0);
  out += "\n";
  return out;
}

CsvWriter::CsvWriter(std::ostream& os, std::initializer_list<std::string> header)
    : os_(os), columns_(header.size()) {
  bool first = true;
  for (const auto& h : header) {
    os_ << (first ? "" : ",") << h;
    first = false;
  }
  os_ << '\n';
}

void CsvWriter::row(std::initializer_list<CsvCell> cells) {
  if (cells.size() != columns_) throw std::logic_error("CsvWriter: row width mismatch");
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os_ << ',';
    first = false;
    if (const auto* d = std::get_if<double>(&c)) {
      if (std::isfinite(*d)) os_ << format_number(*d);
    } else if (const auto* i = std::get_if<long long>(&c)) {
      os_ << *i;
    } else {
      os_ << std::get<std::string>(c);
    }
  }
  os_ << '\n';
}

}  // namespace cfbva
