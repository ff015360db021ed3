#pragma once
// Deterministic JSON text (sorted keys, %.17g floats) and SHA-256 digests.

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <string>

namespace parh::io {

namespace detail {

inline void quote(std::string& out, const std::string& s) {
    out += nlohmann::json(s).dump();
}

inline void write(std::string& out, const nlohmann::json& j, int indent, int depth) {
    auto nl = [&](int d) {
        out += '\n';
        out.append(std::size_t(indent * d), ' ');
    };
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: keys sorted
                if (!first) out += ',';
                first = false;
                nl(depth + 1);
                quote(out, it.key());
                out += ": ";
                write(out, it.value(), indent, depth + 1);
            }
            nl(depth);
            out += '}';
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                nl(depth + 1);
                write(out, j[i], indent, depth + 1);
            }
            nl(depth);
            out += ']';
            return;
        }
        case nlohmann::json::value_t::number_float: {
            double x = j.get<double>();
            if (std::isnan(x)) {
                out += "\"nan\"";
            } else if (std::isinf(x)) {
                out += x > 0 ? "\"inf\"" : "\"-inf\"";
            } else {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", x);
                out += buf;
            }
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace detail

inline std::string to_text(const nlohmann::json& j) {
    std::string out;
    detail::write(out, j, 2, 0);
    out += '\n';
    return out;
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

}  // namespace parh::io
