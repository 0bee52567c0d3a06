#pragma once

// Line-oriented "key = value" text used by every serialized artifact. A file
// starts with "<magic> <version>", then one entry per line; blank lines and
// lines starting with '#' are ignored. Readers consume entries in order and
// insist on the expected key, which keeps the formats strict and versionable.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ctrlid/core_types.hpp"

namespace ctrlid::text {

// Shortest-round-trip formatting is not needed; 17 significant digits always
// round-trips an IEEE double.
std::string format_double(double v);
std::string format_vector(const Vector& v);

class Writer {
 public:
  Writer(std::ostream& os, const std::string& magic, int version);

  void put(const std::string& key, const std::string& value);
  void put(const std::string& key, const char* value) { put(key, std::string(value)); }
  void put(const std::string& key, double value);
  void put(const std::string& key, std::size_t value);
  void put(const std::string& key, bool value);
  void put(const std::string& key, const Vector& value);

 private:
  std::ostream& os_;
};

class Reader {
 public:
  Reader(std::istream& is, const std::string& magic, int version);

  bool at_end() const { return pos_ >= entries_.size(); }
  // Key of the next entry, or "" at the end.
  std::string peek_key() const;

  std::string get_string(const std::string& key);
  double get_double(const std::string& key);
  std::size_t get_size(const std::string& key);
  bool get_bool(const std::string& key);
  Vector get_vector(const std::string& key);
  void expect_end() const;

 private:
  struct Entry {
    std::size_t line;
    std::string key;
    std::string value;
  };
  const Entry& next(const std::string& key);

  std::vector<Entry> entries_;
  std::size_t pos_ = 0;
};

double parse_double(const std::string& s);
Vector parse_vector(const std::string& s);

}  // namespace ctrlid::text
