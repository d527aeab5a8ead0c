#pragma once

// Minimal deterministic JSON document: object keys are kept sorted and
// doubles are printed with fixed 17-significant-digit formatting, so the
// same document always serializes to identical bytes.

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace mvconvex {

class JsonDoc {
public:
    using Array = std::vector<JsonDoc>;
    using Object = std::map<std::string, JsonDoc>;

    JsonDoc() : v_(nullptr) {}
    JsonDoc(std::nullptr_t) : v_(nullptr) {}
    JsonDoc(bool b) : v_(b) {}
    JsonDoc(double d) : v_(d) {}
    JsonDoc(int i) : v_(static_cast<double>(i)) {}
    JsonDoc(long long i) : v_(static_cast<double>(i)) {}
    JsonDoc(std::size_t i) : v_(static_cast<double>(i)) {}
    JsonDoc(const char* s) : v_(std::string(s)) {}
    JsonDoc(std::string s) : v_(std::move(s)) {}
    JsonDoc(Array a) : v_(std::move(a)) {}
    JsonDoc(Object o) : v_(std::move(o)) {}

    JsonDoc& operator[](const std::string& key) {
        if (!std::holds_alternative<Object>(v_)) v_ = Object{};
        return std::get<Object>(v_)[key];
    }

    void push_back(JsonDoc d) {
        if (!std::holds_alternative<Array>(v_)) v_ = Array{};
        std::get<Array>(v_).push_back(std::move(d));
    }

    static std::string format_number(double d) {
        if (std::isnan(d)) return "\"nan\"";
        if (std::isinf(d)) return d > 0 ? "\"inf\"" : "\"-inf\"";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", d);
        return buf;
    }

    std::string dump(int indent = -1) const {
        std::string out;
        dump_rec(out, indent, 0);
        return out;
    }

private:
    std::variant<std::nullptr_t, bool, double, std::string, Array, Object> v_;

    static void escape(const std::string& s, std::string& out) {
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
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        out += '"';
    }

    void newline(std::string& out, int indent, int depth) const {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * depth), ' ');
    }

    void dump_rec(std::string& out, int indent, int depth) const {
        if (std::holds_alternative<std::nullptr_t>(v_)) {
            out += "null";
        } else if (std::holds_alternative<bool>(v_)) {
            out += std::get<bool>(v_) ? "true" : "false";
        } else if (std::holds_alternative<double>(v_)) {
            out += format_number(std::get<double>(v_));
        } else if (std::holds_alternative<std::string>(v_)) {
            escape(std::get<std::string>(v_), out);
        } else if (std::holds_alternative<Array>(v_)) {
            const auto& a = std::get<Array>(v_);
            if (a.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (const auto& e : a) {
                if (!first) out += ',';
                first = false;
                newline(out, indent, depth + 1);
                e.dump_rec(out, indent, depth + 1);
            }
            newline(out, indent, depth);
            out += ']';
        } else {
            const auto& o = std::get<Object>(v_);
            if (o.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (const auto& [k, val] : o) {
                if (!first) out += ',';
                first = false;
                newline(out, indent, depth + 1);
                escape(k, out);
                out += indent < 0 ? ":" : ": ";
                val.dump_rec(out, indent, depth + 1);
            }
            newline(out, indent, depth);
            out += '}';
        }
    }
};

}  // namespace mvconvex
