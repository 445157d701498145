#include "eprsim/results_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace eprsim::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    if (std::strtod(buf, nullptr) == v) {
        return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string csv_quote(const std::string& field) {
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

}  // namespace

std::string csv_row(const ExperimentResult& r) {
    std::ostringstream out;
    out << r.estimator << ',' << format_double(r.value) << ','
        << format_double(r.std_error) << ',' << r.shots << ',' << r.seed << ','
        << csv_quote(r.settings.is_null() ? "{}" : r.settings.dump());
    return out.str();
}

std::string csv_table(const std::vector<ExperimentResult>& results) {
    std::ostringstream out;
    out << csv_header << '\n';
    for (const auto& r : results) {
        out << csv_row(r) << '\n';
    }
    return out.str();
}

nlohmann::ordered_json result_to_json(const ExperimentResult& r) {
    return {{"estimator", r.estimator},
            {"value", r.value},
            {"std_error", r.std_error},
            {"shots", r.shots},
            {"seed", r.seed},
            {"settings", r.settings.is_null() ? nlohmann::ordered_json::object()
                                              : r.settings}};
}

}  // namespace eprsim::io
