#include "entpulse/state_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "entpulse/errors.hpp"

namespace entpulse {

namespace {

double parse_double(const std::string& token, int line) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ConfigError("cannot parse number '" + token + "'", line);
    }
    return value;
}

std::vector<std::string> split(const std::string& text) {
    std::istringstream is(text);
    std::vector<std::string> tokens;
    for (std::string tok; is >> tok;) {
        tokens.push_back(tok);
    }
    return tokens;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw Error("failed to format double");
    }
    return std::string(buf, ptr);
}

void write_state(std::ostream& out, const GaussianState& state) {
    const auto& labels = state.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << (i ? " " : "") << labels[i];
    }
    out << '\n';
    const auto& mean = state.mean();
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        out << (i ? " " : "") << format_double(mean(i));
    }
    out << '\n';
    const auto& cov = state.cov();
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        for (Eigen::Index j = 0; j < cov.cols(); ++j) {
            out << (j ? " " : "") << format_double(cov(i, j));
        }
        out << '\n';
    }
}

GaussianState read_state(std::istream& in) {
    std::string line;
    int line_no = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line)) {
            throw ConfigError("unexpected end of state dump", line_no + 1);
        }
        ++line_no;
        return split(line);
    };

    auto labels = next_line();
    if (labels.empty()) {
        throw ConfigError("state dump has no mode labels", line_no);
    }
    const auto dim = static_cast<Eigen::Index>(2 * labels.size());

    const auto mean_tokens = next_line();
    if (static_cast<Eigen::Index>(mean_tokens.size()) != dim) {
        throw ConfigError("mean line must have " + std::to_string(dim) + " values", line_no);
    }
    Vector mean(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        mean(i) = parse_double(mean_tokens[static_cast<std::size_t>(i)], line_no);
    }

    Matrix cov(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const auto row = next_line();
        if (static_cast<Eigen::Index>(row.size()) != dim) {
            throw ConfigError("covariance row must have " + std::to_string(dim) + " values",
                              line_no);
        }
        for (Eigen::Index j = 0; j < dim; ++j) {
            cov(i, j) = parse_double(row[static_cast<std::size_t>(j)], line_no);
        }
    }
    return GaussianState(std::move(labels), std::move(mean), std::move(cov));
}

}  // namespace entpulse
