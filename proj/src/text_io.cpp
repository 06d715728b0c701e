#include "osaom/text_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "osaom/errors.hpp"

namespace osaom {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

bool is_na(const std::string& tok) { return tok == "NA" || tok == "na" || tok == "."; }

int parse_int_token(const std::string& tok, const std::string& where) {
    int value = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw DataError(where + ": expected an integer, got '" + tok + "'");
    return value;
}

std::vector<std::vector<std::string>> read_token_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        auto toks = tokenize(line);
        if (!toks.empty()) rows.push_back(std::move(toks));
    }
    return rows;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ObservedMatrix read_matrix_file(const std::string& path) {
    auto rows = read_token_rows(path);
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw DataError("matrix file " + path + " is empty");
    ObservedMatrix m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw DataError("file " + path + " row " + std::to_string(i + 1) + ": expected " +
                            std::to_string(n) + " entries, got " +
                            std::to_string(rows[i].size()));
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;  // diagonal is structurally empty
            const std::string& tok = rows[i][j];
            if (is_na(tok)) {
                m.set(i, j, ObservedMatrix::kMissing);
            } else {
                const std::string where = "file " + path + " row " + std::to_string(i + 1);
                int v = parse_int_token(tok, where);
                if (v < 0 || v > 127) throw DataError(where + ": value " + tok + " out of range");
                m.set(i, j, v);
            }
        }
    }
    return m;
}

void write_matrix_file(const std::string& path, const ObservedMatrix& m) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file " + path);
    for (int i = 0; i < m.n(); ++i) {
        for (int j = 0; j < m.n(); ++j) {
            if (j > 0) out << ' ';
            if (i != j && m.missing(i, j))
                out << "NA";
            else
                out << (i == j ? 0 : m.at(i, j));
        }
        out << '\n';
    }
}

void write_matrix_file(const std::string& path, const BinaryMatrix& m) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file " + path);
    for (int i = 0; i < m.n(); ++i) {
        for (int j = 0; j < m.n(); ++j) {
            if (j > 0) out << ' ';
            out << (i != j && m(i, j) ? 1 : 0);
        }
        out << '\n';
    }
}

std::vector<int> read_behavior_file(const std::string& path, int n) {
    auto rows = read_token_rows(path);
    if (static_cast<int>(rows.size()) != n)
        throw DataError("file " + path + ": expected " + std::to_string(n) + " lines, got " +
                        std::to_string(rows.size()));
    std::vector<int> z(n, kMissingBehavior);
    for (int i = 0; i < n; ++i) {
        if (rows[i].size() != 1)
            throw DataError("file " + path + " line " + std::to_string(i + 1) +
                            ": expected one value per line");
        if (!is_na(rows[i][0]))
            z[i] = parse_int_token(rows[i][0], "file " + path + " line " + std::to_string(i + 1));
    }
    return z;
}

void write_behavior_file(const std::string& path, const std::vector<int>& z) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file " + path);
    for (int v : z) {
        if (v == kMissingBehavior)
            out << "NA\n";
        else
            out << v << '\n';
    }
}

int TextTable::column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name) return static_cast<int>(c);
    return -1;
}

TextTable read_table_file(const std::string& path) {
    auto rows = read_token_rows(path);
    if (rows.empty()) throw DataError("table file " + path + " is empty");
    TextTable t;
    t.header = rows.front();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != t.header.size())
            throw DataError("file " + path + " row " + std::to_string(r + 1) + ": expected " +
                            std::to_string(t.header.size()) + " columns, got " +
                            std::to_string(rows[r].size()));
        t.rows.push_back(std::move(rows[r]));
    }
    return t;
}

long parse_date(const std::string& iso) {
    int y = 0, mo = 0, d = 0;
    char dash1 = 0, dash2 = 0;
    std::istringstream ss(iso);
    ss >> y >> dash1 >> mo >> dash2 >> d;
    if (!ss || dash1 != '-' || dash2 != '-' || mo < 1 || mo > 12 || d < 1 || d > 31)
        throw DataError("cannot parse date '" + iso + "' (expected YYYY-MM-DD)");
    // days-from-civil, proleptic Gregorian
    y -= mo <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str(), path);
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + " line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + " line " + std::to_string(lineno) + ": empty key");
        cfg.set(key, value);
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

int KeyValueConfig::get_int(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t pos = 0;
        int out = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" + v + "'");
    }
}

double KeyValueConfig::get_double(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" + v + "'");
    }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) order_.push_back(key);
    values_[key] = value;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& k : order_)
        if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
}

}  // namespace osaom
