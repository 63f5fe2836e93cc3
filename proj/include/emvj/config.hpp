#pragma once

// Flat `key = value` configuration with optional `[section]` headers.
// A key inside section `s` is stored as `s.key`. `#` and `;` start comments.

#include "emvj/errors.hpp"
#include "emvj/text.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>

namespace emvj {

class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "config")
    {
        Config cfg;
        std::string section;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto t = text::trim(line);
            if (const auto hash = t.find_first_of("#;"); hash != std::string_view::npos) t = text::trim(t.substr(0, hash));
            if (t.empty()) continue;
            const auto where = source + ":" + std::to_string(line_no) + ": ";
            if (t.front() == '[') {
                if (t.back() != ']') throw DataError(where + "unterminated section header");
                section = std::string(text::trim(t.substr(1, t.size() - 2)));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string_view::npos) throw DataError(where + "expected key = value");
            const auto key = std::string(text::trim(t.substr(0, eq)));
            if (key.empty()) throw DataError(where + "empty key");
            cfg.values_[section.empty() ? key : section + "." + key] = std::string(text::trim(t.substr(eq + 1)));
        }
        return cfg;
    }

    static Config load(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw DataError(path + ": cannot open config file");
        return parse(in, path);
    }

    [[nodiscard]] std::optional<std::string> get(const std::string& key) const
    {
        const auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace emvj
