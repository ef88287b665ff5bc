#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Structured plain-text reports: a tiny ordered JSON value with doubles
// printed at 17 significant digits, and atomic (write-temp-then-rename) file
// output. Key order is insertion order, so identical runs produce identical
// bytes.

namespace mos {

class Json {
  public:
    Json() : kind_(Kind::null) {}
    Json(bool b) : kind_(Kind::boolean), bool_(b) {}
    Json(double d) : kind_(Kind::number), num_(d) {}
    Json(int i) : kind_(Kind::integer), int_(i) {}
    Json(long i) : kind_(Kind::integer), int_(i) {}
    Json(long long i) : kind_(Kind::integer), int_(i) {}
    Json(std::size_t i) : kind_(Kind::integer), int_(static_cast<long long>(i)) {}
    Json(const char* s) : kind_(Kind::string), str_(s) {}
    Json(std::string s) : kind_(Kind::string), str_(std::move(s)) {}

    static Json object() {
        Json j;
        j.kind_ = Kind::object;
        return j;
    }
    static Json array() {
        Json j;
        j.kind_ = Kind::array;
        return j;
    }

    Json& set(const std::string& key, Json value) {
        if (kind_ != Kind::object) throw std::logic_error("Json::set on non-object");
        members_.emplace_back(key, std::move(value));
        return *this;
    }

    Json& push(Json value) {
        if (kind_ != Kind::array) throw std::logic_error("Json::push on non-array");
        items_.push_back(std::move(value));
        return *this;
    }

    std::string dump(int indent = 2) const {
        std::string out;
        write(out, indent, 0);
        out += "\n";
        return out;
    }

  private:
    enum class Kind { null, boolean, integer, number, string, array, object };

    Kind kind_;
    bool bool_ = false;
    long long int_ = 0;
    double num_ = 0.0;
    std::string str_;
    std::vector<Json> items_;
    std::vector<std::pair<std::string, Json>> members_;

    static void write_escaped(std::string& out, const std::string& s) {
        out += '"';
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                case '\r': out += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        out += '"';
    }

    void write(std::string& out, int indent, int depth) const {
        const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
        const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
        switch (kind_) {
            case Kind::null: out += "null"; break;
            case Kind::boolean: out += bool_ ? "true" : "false"; break;
            case Kind::integer: out += std::to_string(int_); break;
            case Kind::number: {
                if (!std::isfinite(num_)) {
                    write_escaped(out, num_ > 0 ? "inf" : (num_ < 0 ? "-inf" : "nan"));
                    break;
                }
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", num_);
                out += buf;
                break;
            }
            case Kind::string: write_escaped(out, str_); break;
            case Kind::array: {
                if (items_.empty()) {
                    out += "[]";
                    break;
                }
                out += "[\n";
                for (std::size_t i = 0; i < items_.size(); ++i) {
                    out += pad_in;
                    items_[i].write(out, indent, depth + 1);
                    if (i + 1 < items_.size()) out += ",";
                    out += "\n";
                }
                out += pad + "]";
                break;
            }
            case Kind::object: {
                if (members_.empty()) {
                    out += "{}";
                    break;
                }
                out += "{\n";
                for (std::size_t i = 0; i < members_.size(); ++i) {
                    out += pad_in;
                    write_escaped(out, members_[i].first);
                    out += ": ";
                    members_[i].second.write(out, indent, depth + 1);
                    if (i + 1 < members_.size()) out += ",";
                    out += "\n";
                }
                out += pad + "}";
                break;
            }
        }
    }
};

/// Writes content to path via a temp file plus rename.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        f << content;
        if (!f) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace mos
