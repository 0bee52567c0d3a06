#include "ctrlid/text_format.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "ctrlid/errors.hpp"

namespace ctrlid::text {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_vector(const Vector& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v[i]);
  }
  return out;
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) throw DataError("empty number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) throw DataError("not a number: '" + t + "'");
  if (errno == ERANGE && std::isinf(v)) throw DataError("number out of range: '" + t + "'");
  return v;
}

Vector parse_vector(const std::string& s) {
  Vector out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(parse_double(tok));
  return out;
}

Writer::Writer(std::ostream& os, const std::string& magic, int version) : os_(os) {
  os_ << magic << ' ' << version << '\n';
}

void Writer::put(const std::string& key, const std::string& value) { os_ << key << " = " << value << '\n'; }
void Writer::put(const std::string& key, double value) { put(key, format_double(value)); }
void Writer::put(const std::string& key, std::size_t value) { put(key, std::to_string(value)); }
void Writer::put(const std::string& key, bool value) { put(key, std::string(value ? "true" : "false")); }
void Writer::put(const std::string& key, const Vector& value) { put(key, format_vector(value)); }

Reader::Reader(std::istream& is, const std::string& magic, int version) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header) {
      std::istringstream hs(t);
      std::string m;
      int v = -1;
      if (!(hs >> m >> v) || m != magic) throw DataError("line " + std::to_string(lineno) + ": expected header '" + magic + "'");
      if (v != version) {
        throw DataError("unsupported " + magic + " version " + std::to_string(v) + " (expected " +
                        std::to_string(version) + ")");
      }
      header = true;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw DataError("line " + std::to_string(lineno) + ": expected 'key = value'");
    entries_.push_back({lineno, trim(t.substr(0, eq)), trim(t.substr(eq + 1))});
  }
  if (!header) throw DataError("missing header '" + magic + "'");
}

std::string Reader::peek_key() const { return at_end() ? std::string() : entries_[pos_].key; }

const Reader::Entry& Reader::next(const std::string& key) {
  if (at_end()) throw DataError("unexpected end of file, expected key '" + key + "'");
  const Entry& e = entries_[pos_];
  if (e.key != key) {
    throw DataError("line " + std::to_string(e.line) + ": expected key '" + key + "', found '" + e.key + "'");
  }
  ++pos_;
  return e;
}

std::string Reader::get_string(const std::string& key) { return next(key).value; }

double Reader::get_double(const std::string& key) {
  const Entry& e = next(key);
  try {
    return parse_double(e.value);
  } catch (const DataError& err) {
    throw DataError("line " + std::to_string(e.line) + ": " + err.what());
  }
}

std::size_t Reader::get_size(const std::string& key) {
  const Entry& e = next(key);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(e.value.c_str(), &end, 10);
  if (e.value.empty() || *end != '\0' || e.value[0] == '-') {
    throw DataError("line " + std::to_string(e.line) + ": expected a non-negative integer for '" + key + "'");
  }
  return static_cast<std::size_t>(v);
}

bool Reader::get_bool(const std::string& key) {
  const Entry& e = next(key);
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw DataError("line " + std::to_string(e.line) + ": expected true or false for '" + key + "'");
}

Vector Reader::get_vector(const std::string& key) {
  const Entry& e = next(key);
  try {
    return parse_vector(e.value);
  } catch (const DataError& err) {
    throw DataError("line " + std::to_string(e.line) + ": " + err.what());
  }
}

void Reader::expect_end() const {
  if (!at_end()) {
    throw DataError("line " + std::to_string(entries_[pos_].line) + ": unexpected key '" + entries_[pos_].key + "'");
  }
}

}  // namespace ctrlid::text
