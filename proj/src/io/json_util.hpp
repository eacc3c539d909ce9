#pragma once

// Field access with path context for error messages.

#include <json.hpp>
#include <string>
#include <string_view>

#include "ltr/core/errors.hpp"

namespace ltr::io::detail {

using nlohmann::json;

inline json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw ParseError(what + ": " + e.what());
    }
}

inline const json& field(const json& obj, const std::string& key, const std::string& ctx) {
    if (!obj.is_object()) {
        throw ParseError(ctx + ": expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(ctx + ": missing field '" + key + "'");
    }
    return *it;
}

inline double number(const json& v, const std::string& ctx) {
    if (!v.is_number()) {
        throw ParseError(ctx + ": expected a number");
    }
    return v.get<double>();
}

inline long long integer(const json& v, const std::string& ctx) {
    if (!v.is_number_integer()) {
        throw ParseError(ctx + ": expected an integer");
    }
    return v.get<long long>();
}

inline std::size_t count(const json& v, const std::string& ctx) {
    const long long n = integer(v, ctx);
    if (n < 0) {
        throw ParseError(ctx + ": expected a non-negative integer");
    }
    return static_cast<std::size_t>(n);
}

inline std::string text(const json& v, const std::string& ctx) {
    if (!v.is_string()) {
        throw ParseError(ctx + ": expected a string");
    }
    return v.get<std::string>();
}

inline const json& array(const json& v, const std::string& ctx) {
    if (!v.is_array()) {
        throw ParseError(ctx + ": expected an array");
    }
    return v;
}

inline std::string at(const std::string& ctx, std::size_t i) { return ctx + "[" + std::to_string(i) + "]"; }

}  // namespace ltr::io::detail
