#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errmax/dataset.hpp"
#include "errmax/error.hpp"

namespace errmax {

namespace {

constexpr std::string_view kMagicLine = "#errmax-labeled-set v1";

std::string fmt17(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return {buf, static_cast<std::size_t>(n)};
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> split_list(std::string_view text) {
    return text.empty() ? std::vector<std::string>{} : split(text, ',');
}

double parse_double(std::string_view text, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError(line, "not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::vector<double> parse_doubles(std::string_view text, std::size_t line) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_double(part, line));
    return out;
}

}  // namespace

void save_csv(const LabeledSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");

    std::vector<std::string> lo;
    std::vector<std::string> hi;
    for (const auto& b : set.normalizer.bounds()) {
        lo.push_back(fmt17(b.lo));
        hi.push_back(fmt17(b.hi));
    }
    out << kMagicLine << '\n';
    out << "#name=" << set.name << '\n';
    out << "#dim_names=" << join(set.dim_names) << '\n';
    out << "#dim_units=" << join(set.dim_units) << '\n';
    out << "#target_units=" << set.target_units << '\n';
    out << "#normalizer lo=" << join(lo) << " hi=" << join(hi) << '\n';
    for (std::size_t j = 0; j < set.dim(); ++j) out << "dim_" << j << ',';
    out << "target,provenance\n";

    const bool labeled = set.is_labeled();
    std::string row;
    for (std::size_t i = 0; i < set.size(); ++i) {
        row.clear();
        for (std::size_t j = 0; j < set.dim(); ++j) {
            row += fmt17(set.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            row += ',';
        }
        if (labeled) row += fmt17(set.targets(static_cast<Eigen::Index>(i)));
        row += ',';
        row += set.provenance[i].str();
        row += '\n';
        out << row;
    }
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

LabeledSet load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());

    LabeledSet set;
    std::optional<std::vector<double>> lo;
    std::optional<std::vector<double>> hi;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    std::size_t d = 0;
    std::vector<double> rows;
    std::vector<double> targets;
    std::optional<bool> labeled;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1) {
            if (line != kMagicLine) throw ParseError(lineno, "missing '" + std::string(kMagicLine) + "' marker");
            continue;
        }
        if (line.starts_with('#')) {
            if (header_seen) throw ParseError(lineno, "metadata after the column header");
            const std::string_view body = std::string_view(line).substr(1);
            if (body.starts_with("name=")) {
                set.name = std::string(body.substr(5));
            } else if (body.starts_with("dim_names=")) {
                set.dim_names = split_list(body.substr(10));
            } else if (body.starts_with("dim_units=")) {
                set.dim_units = split_list(body.substr(10));
            } else if (body.starts_with("target_units=")) {
                set.target_units = std::string(body.substr(13));
            } else if (body.starts_with("normalizer ")) {
                const auto lo_pos = body.find("lo=");
                const auto hi_pos = body.find(" hi=");
                if (lo_pos == std::string_view::npos || hi_pos == std::string_view::npos || hi_pos < lo_pos) {
                    throw ParseError(lineno, "normalizer line needs 'lo=... hi=...'");
                }
                lo = parse_doubles(body.substr(lo_pos + 3, hi_pos - lo_pos - 3), lineno);
                hi = parse_doubles(body.substr(hi_pos + 4), lineno);
            }
            continue;
        }
        if (!header_seen) {
            const auto cols = split(line, ',');
            if (cols.size() < 3 || cols[cols.size() - 2] != "target" || cols.back() != "provenance") {
                throw ParseError(lineno, "column header must be dim_0,...,target,provenance");
            }
            d = cols.size() - 2;
            for (std::size_t j = 0; j < d; ++j) {
                if (cols[j] != "dim_" + std::to_string(j)) throw ParseError(lineno, "unexpected column '" + cols[j] + "'");
            }
            if (!lo || !hi || lo->size() != d || hi->size() != d) {
                throw ParseError(lineno, "normalizer bounds missing or of the wrong dimension");
            }
            std::vector<Interval> bounds;
            for (std::size_t j = 0; j < d; ++j) bounds.push_back({(*lo)[j], (*hi)[j]});
            try {
                set.normalizer = Normalizer(std::move(bounds));
            } catch (const Error& e) {
                throw ParseError(lineno, e.what());
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        const auto cols = split(line, ',');
        if (cols.size() != d + 2) {
            throw ParseError(lineno, "expected " + std::to_string(d + 2) + " columns, found " + std::to_string(cols.size()));
        }
        for (std::size_t j = 0; j < d; ++j) rows.push_back(parse_double(cols[j], lineno));
        const bool has_target = !cols[d].empty();
        if (labeled && *labeled != has_target) throw ParseError(lineno, "mixed labelled and unlabelled rows");
        labeled = has_target;
        if (has_target) targets.push_back(parse_double(cols[d], lineno));
        try {
            set.provenance.push_back(Provenance::parse(cols[d + 1]));
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (lineno == 0) throw ParseError(1, "empty file");
    if (!header_seen) throw ParseError(lineno + 1, "missing column header");

    const auto n = static_cast<Eigen::Index>(set.provenance.size());
    set.inputs.resize(n, static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d); ++j) {
            set.inputs(i, j) = rows[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(j)];
        }
    }
    if (labeled.value_or(true)) {
        set.targets = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
    }
    return set;
}

}  // namespace errmax
