#include "gdnm/series_io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace gdnm {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void write_series_csv(std::ostream& out, const EstimateSeries& series) {
    out << "grid,estimate,ci_low,ci_high,n\n";
    for (const auto& r : series.rows) {
        out << format_number(r.grid) << ',' << format_number(r.estimate) << ',' << format_number(r.ci_low) << ','
            << format_number(r.ci_high) << ',' << r.n << '\n';
    }
}

std::string series_csv(const EstimateSeries& series) {
    std::ostringstream out;
    write_series_csv(out, series);
    return out.str();
}

namespace {

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

} // namespace

nlohmann::json series_to_json(const EstimateSeries& series) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : series.rows) {
        rows.push_back({{"grid", number(r.grid)},
                        {"estimate", number(r.estimate)},
                        {"ci_low", number(r.ci_low)},
                        {"ci_high", number(r.ci_high)},
                        {"n", r.n}});
    }
    nlohmann::json derived = nlohmann::json::object();
    for (const auto& [k, v] : series.derived) derived[k] = number(v);
    nlohmann::json out{{"name", series.name}, {"grid_label", series.grid_label}, {"rows", rows}, {"derived", derived}};
    if (!series.reference.empty()) {
        nlohmann::json ref = nlohmann::json::array();
        for (double v : series.reference) ref.push_back(number(v));
        out["reference"] = ref;
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256_hex: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

} // namespace gdnm
