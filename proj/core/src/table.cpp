#include "fraclap/table.hpp"

#include <cstdio>
#include <sstream>

#include "fraclap/errors.hpp"

namespace fraclap {

namespace {

constexpr char kHeader[] = "alpha,kappa,N,scheme,solver,error_inf,order,iterations,wall_time_s";

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (;;) {
        const size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string markdown_table(const std::vector<StudyRow>& rows) {
    std::ostringstream out;
    // Group rows that share a configuration, preserving first-seen order.
    std::vector<size_t> used(rows.size(), 0);
    for (size_t k = 0; k < rows.size(); ++k) {
        if (used[k]) {
            continue;
        }
        const StudyRow& head = rows[k];
        out << "### alpha=" << fmt17(head.alpha) << " kappa=" << fmt17(head.kappa)
            << " scheme=" << to_token(head.scheme) << " solver=" << to_token(head.solver)
            << "\n\n";
        out << "| N | error_inf | order | iterations | wall_time_s |\n";
        out << "|---|-----------|-------|------------|-------------|\n";
        for (size_t j = k; j < rows.size(); ++j) {
            const StudyRow& r = rows[j];
            if (r.alpha != head.alpha || r.kappa != head.kappa ||
                r.scheme != head.scheme || r.solver != head.solver) {
                continue;
            }
            used[j] = 1;
            out << "| " << r.n << " | " << fmt17(r.error_inf) << " | "
                << (r.order ? fmt17(*r.order) : std::string("---")) << " | "
                << (r.iterations ? std::to_string(*r.iterations) : std::string("---"))
                << " | " << fmt17(r.wall_time_s) << " |\n";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::string emit_table(const std::vector<StudyRow>& rows, OutputFormat format) {
    if (rows.empty()) {
        throw validation_error("emit table: no rows");
    }
    if (format == OutputFormat::markdown) {
        return markdown_table(rows);
    }
    std::ostringstream out;
    out << kHeader << "\n";
    for (const StudyRow& r : rows) {
        out << fmt17(r.alpha) << ',' << fmt17(r.kappa) << ',' << r.n << ','
            << to_token(r.scheme) << ',' << to_token(r.solver) << ',' << fmt17(r.error_inf)
            << ',' << (r.order ? fmt17(*r.order) : std::string()) << ','
            << (r.iterations ? std::to_string(*r.iterations) : std::string()) << ','
            << fmt17(r.wall_time_s) << "\n";
    }
    return out.str();
}

std::vector<StudyRow> parse_study_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw validation_error("csv: missing or unexpected header");
    }
    std::vector<StudyRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 9) {
            throw validation_error("csv: malformed row '" + line + "'");
        }
        StudyRow r;
        r.alpha = std::stod(f[0]);
        r.kappa = std::stod(f[1]);
        r.n = std::stoi(f[2]);
        r.scheme = scheme_from_token(f[3]);
        r.solver = solver_from_token(f[4]);
        r.error_inf = std::stod(f[5]);
        if (!f[6].empty()) {
            r.order = std::stod(f[6]);
        }
        if (!f[7].empty()) {
            r.iterations = std::stoi(f[7]);
        }
        r.wall_time_s = std::stod(f[8]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace fraclap
