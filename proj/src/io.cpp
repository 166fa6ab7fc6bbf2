#include "beamlab/io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#if __has_include(<beamlab/build_desc.hpp>)
#include <beamlab/build_desc.hpp>
#else
#define BEAMLAB_BUILD_DESC "beamlab (untracked build)"
#endif

namespace beamlab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CsvWriter::Impl {
    std::ofstream out;
    std::size_t n_cols;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : impl_(new Impl) {
    impl_->out.open(path);
    if (!impl_->out) {
        delete impl_;
        throw std::runtime_error("csv: cannot open '" + path + "' for writing");
    }
    impl_->n_cols = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        impl_->out << header[i] << (i + 1 < header.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != impl_->n_cols)
        throw std::invalid_argument("csv: row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i)
        impl_->out << cells[i] << (i + 1 < cells.size() ? "," : "\n");
}

void CsvWriter::row_values(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row(cells);
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    KeyValueConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (!key.empty()) cfg.entries_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

void KeyValueConfig::merge_overrides(const std::vector<std::string>& kvs) {
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override '" + kv + "' is not key=value");
        entries_[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : std::stod(it->second);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : std::stoi(it->second);
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              const std::vector<int>& fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<int> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::vector<double>& fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

std::string build_description() { return BEAMLAB_BUILD_DESC; }

}  // namespace beamlab
