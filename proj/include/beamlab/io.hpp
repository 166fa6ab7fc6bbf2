#ifndef BEAMLAB_IO_HPP
#define BEAMLAB_IO_HPP

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace beamlab {

/** All floating-point output is serialized with 17 significant digits
 * so that repeated runs are byte-identical and exactly re-readable. */
std::string format_double(double v);

/** Minimal CSV writer; every cell goes through format_double for
 * doubles. Rows are written in the order provided. */
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    void row(const std::vector<std::string>& cells);
    void row_values(const std::vector<double>& values);

  private:
    struct Impl;
    Impl* impl_;
};

/** Flat key=value configuration: file plus overrides, overrides win.
 * Lines starting with '#' are comments. */
class KeyValueConfig {
  public:
    KeyValueConfig() = default;
    static KeyValueConfig from_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    void merge_overrides(const std::vector<std::string>& key_equals_value);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;
    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::ordered_json& doc);

/** Build identification embedded in run manifests. */
std::string build_description();

}  // namespace beamlab

#endif
