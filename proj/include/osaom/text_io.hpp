#pragma once

#include <map>
#include <string>
#include <vector>

#include "osaom/dataset.hpp"

namespace osaom {

// Whitespace-separated integer matrix, one row per actor, `NA` for missing.
ObservedMatrix read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const ObservedMatrix& m);
void write_matrix_file(const std::string& path, const BinaryMatrix& m);

// Behaviour column: one value (or NA) per actor line.
std::vector<int> read_behavior_file(const std::string& path, int n);
void write_behavior_file(const std::string& path, const std::vector<int>& z);

// Whitespace-delimited table with a header row; all cells kept as strings.
struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

TextTable read_table_file(const std::string& path);

// ISO-8601 calendar date -> serial day number (proleptic Gregorian).
long parse_date(const std::string& iso);

// key = value configuration file; '#' starts a comment. Later assignments of
// the same key override earlier ones.
class KeyValueConfig {
  public:
    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_string(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    std::string get(const std::string& key) const;                         // throws when absent
    std::string get_or(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    // Keys in first-assignment order, for the manifest echo.
    const std::vector<std::string>& keys() const { return order_; }
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

    const std::string& origin() const { return origin_; }

  private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
    std::string origin_;
};

}  // namespace osaom
