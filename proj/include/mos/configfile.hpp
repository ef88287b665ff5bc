#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// UTF-8 INI-style run configuration: [section] headers, key = value lines,
// full-line comments with '#' or ';'. The reader tracks consumed keys so
// unknown keys are rejected, and records every applied default so reports can
// echo the complete effective configuration.

namespace mos {

struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {
inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
}  // namespace detail

struct IniFile {
    // section -> key -> raw value; insertion order kept separately for echo.
    std::map<std::string, std::map<std::string, std::string>> data;
    std::vector<std::string> section_order;

    static IniFile parse(std::istream& is) {
        IniFile ini;
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw config_error("config line " + std::to_string(lineno) +
                                       ": malformed section header");
                section = detail::trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    throw config_error("config line " + std::to_string(lineno) +
                                       ": empty section name");
                if (!ini.data.count(section)) ini.section_order.push_back(section);
                ini.data[section];
                continue;
            }
            const std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw config_error("config line " + std::to_string(lineno) +
                                   ": expected key = value");
            if (section.empty())
                throw config_error("config line " + std::to_string(lineno) +
                                   ": key outside any [section]");
            const std::string key = detail::trim(t.substr(0, eq));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key.empty())
                throw config_error("config line " + std::to_string(lineno) + ": empty key");
            if (ini.data[section].count(key))
                throw config_error("config: duplicate key '" + key + "' in [" + section + "]");
            ini.data[section][key] = value;
        }
        return ini;
    }

    static IniFile parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw config_error("cannot open config file '" + path + "'");
        return parse(f);
    }
};

/// One echoed key: the effective value and whether it came from a default.
struct EchoEntry {
    std::string section;
    std::string key;
    std::string value;
    bool defaulted = false;
};

class ConfigReader;

class SectionReader {
  public:
    SectionReader(ConfigReader& owner, std::string name) : owner_(owner), name_(std::move(name)) {}

    bool has(const std::string& key) const;

    std::string req_string(const std::string& key);
    std::string opt_string(const std::string& key, const std::string& def);
    double req_double(const std::string& key);
    double opt_double(const std::string& key, double def);
    long req_long(const std::string& key);
    long opt_long(const std::string& key, long def);
    bool opt_bool(const std::string& key, bool def);
    std::vector<double> opt_double_list(const std::string& key, const std::vector<double>& def);
    std::vector<std::string> opt_string_list(const std::string& key,
                                             const std::vector<std::string>& def);

    const std::string& name() const { return name_; }

  private:
    friend class ConfigReader;
    ConfigReader& owner_;
    std::string name_;
};

class ConfigReader {
  public:
    explicit ConfigReader(IniFile ini) : ini_(std::move(ini)) {}

    SectionReader section(const std::string& name) {
        known_sections_.insert(name);
        return SectionReader(*this, name);
    }

    bool has_section(const std::string& name) const { return ini_.data.count(name) > 0; }

    /// Rejects unread keys and sections the command does not know about.
    void finish() const {
        for (const auto& [sec, kv] : ini_.data) {
            if (!known_sections_.count(sec))
                throw config_error("unknown section [" + sec + "] in config");
            for (const auto& [key, value] : kv) {
                (void)value;
                if (!consumed_.count(sec + "\n" + key))
                    throw config_error("unknown key '" + key + "' in [" + sec + "]");
            }
        }
    }

    const std::vector<EchoEntry>& echo() const { return echo_; }

  private:
    friend class SectionReader;
    IniFile ini_;
    std::set<std::string> known_sections_;
    std::set<std::string> consumed_;
    std::vector<EchoEntry> echo_;

    const std::string* raw(const std::string& sec, const std::string& key) const {
        auto s = ini_.data.find(sec);
        if (s == ini_.data.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }

    std::string take(const SectionReader& sr, const std::string& key, const std::string* def) {
        const std::string* v = raw(sr.name_, key);
        if (!v && !def)
            throw config_error("missing required key '" + key + "' in [" + sr.name_ + "]");
        consumed_.insert(sr.name_ + "\n" + key);
        const std::string value = v ? *v : *def;
        echo_.push_back({sr.name_, key, value, v == nullptr});
        return value;
    }
};

inline bool SectionReader::has(const std::string& key) const {
    return owner_.raw(name_, key) != nullptr;
}

inline std::string SectionReader::req_string(const std::string& key) {
    return owner_.take(*this, key, nullptr);
}

inline std::string SectionReader::opt_string(const std::string& key, const std::string& def) {
    return owner_.take(*this, key, &def);
}

inline double SectionReader::req_double(const std::string& key) {
    const std::string v = req_string(key);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (detail::trim(v.substr(used)).empty()) return d;
    } catch (const std::exception&) {
    }
    throw config_error("key '" + key + "' in [" + name_ + "]: expected a number, got '" + v + "'");
}

inline double SectionReader::opt_double(const std::string& key, double def) {
    if (!has(key)) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", def);
        std::string s(buf);
        owner_.take(*this, key, &s);
        return def;
    }
    return req_double(key);
}

inline long SectionReader::req_long(const std::string& key) {
    const double d = req_double(key);
    const long l = static_cast<long>(d);
    if (static_cast<double>(l) != d)
        throw config_error("key '" + key + "' in [" + name_ + "]: expected an integer");
    return l;
}

inline long SectionReader::opt_long(const std::string& key, long def) {
    if (!has(key)) {
        std::string s = std::to_string(def);
        owner_.take(*this, key, &s);
        return def;
    }
    return req_long(key);
}

inline bool SectionReader::opt_bool(const std::string& key, bool def) {
    if (!has(key)) {
        std::string s = def ? "true" : "false";
        owner_.take(*this, key, &s);
        return def;
    }
    std::string v = req_string(key);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw config_error("key '" + key + "' in [" + name_ + "]: expected a boolean, got '" + v + "'");
}

inline std::vector<double> SectionReader::opt_double_list(const std::string& key,
                                                          const std::vector<double>& def) {
    if (!has(key)) {
        std::string s;
        char buf[40];
        for (std::size_t i = 0; i < def.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", def[i]);
            if (i) s += ",";
            s += buf;
        }
        owner_.take(*this, key, &s);
        return def;
    }
    const std::string v = req_string(key);
    std::vector<double> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw config_error("key '" + key + "' in [" + name_ + "]: bad list entry '" + item +
                               "'");
        }
    }
    if (out.empty())
        throw config_error("key '" + key + "' in [" + name_ + "]: empty list");
    return out;
}

inline std::vector<std::string> SectionReader::opt_string_list(
    const std::string& key, const std::vector<std::string>& def) {
    if (!has(key)) {
        std::string s;
        for (std::size_t i = 0; i < def.size(); ++i) {
            if (i) s += ",";
            s += def[i];
        }
        owner_.take(*this, key, &s);
        return def;
    }
    const std::string v = req_string(key);
    std::vector<std::string> out;
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = detail::trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace mos
