#pragma once

#include <map>
#include <string>
#include <vector>

namespace rbfood {

// One registered configuration key. type is "real", "int", "bool", or
// "string"; every key carries a default so a run without a config file is
// fully specified.
struct ConfigKey {
    const char* name;
    const char* type;
    const char* default_value;
    const char* help;
};

// Flat key = value configuration. Files are plain text: one `key = value`
// per line, `#` starts a comment, blank lines ignored. Keys must appear in
// the registry; values must parse as the registered type.
class Config {
public:
    static const std::vector<ConfigKey>& registry();

    static Config defaults();
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    double num(const std::string& key) const;
    int integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    const std::string& str(const std::string& key) const;

    void set(const std::string& key, const std::string& value);

    // Every key in registry order as `key = value` lines.
    std::string dump() const;

private:
    const std::string& raw(const std::string& key, const char* want_type) const;
    std::map<std::string, std::string> values_;
};

}  // namespace rbfood
