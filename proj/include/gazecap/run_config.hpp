#ifndef GAZECAP_RUN_CONFIG_HPP
#define GAZECAP_RUN_CONFIG_HPP

#include "gazecap/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace gazecap {

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

/// Flat key=value settings over a fixed key schema. Unknown keys are errors.
/// Lines starting with '#' and blank lines are ignored.
class RunConfig {
public:
    explicit RunConfig(std::vector<ConfigKey> schema);

    const std::vector<ConfigKey>& schema() const { return schema_; }
    bool known(const std::string& key) const;

    void load_file(const std::filesystem::path& path);
    void load_text(const std::string& text, const std::string& origin = "config");
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    long long get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    Real get_real(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    /// "key=value" lines in schema order.
    std::string echo() const;
    /// Same lines, each prefixed with `prefix` (for comment headers).
    std::string echo(const std::string& prefix) const;
    std::vector<std::pair<std::string, std::string>> items() const;

private:
    std::size_t slot(const std::string& key) const;

    std::vector<ConfigKey> schema_;
    std::vector<std::string> values_;
};

/// Parses "key=value" lines without a schema (used for config echoes read back
/// from artifacts).
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text,
                                                                  const std::string& origin = "config");

}  // namespace gazecap

#endif  // GAZECAP_RUN_CONFIG_HPP
