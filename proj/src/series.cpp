#include "bdfp/series.hpp"

#include "bdfp/errors.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace bdfp {

void write_series_csv(std::ostream& os, const RunSeries& series) {
    const auto old = os.precision(17);
    os << "t," << (series.kind == RunSeries::Kind::becker_doring ? "c1" : "theta")
       << ",G,F_rho,D,W_mass,Wp_moment,edge_mass\n";
    for (const auto& r : series.records)
        os << r.t << ',' << r.theta << ',' << r.G << ',' << r.F << ',' << r.D << ',' << r.w_mass << ','
           << r.wp_moment << ',' << r.edge_mass << '\n';
    os.precision(old);
}

RunSeries read_series_csv(std::istream& is) {
    RunSeries s;
    std::string line;
    while (std::getline(is, line) && (line.empty() || line[0] == '#')) {
    }
    if (line.rfind("t,", 0) != 0) throw ConfigError("Series: missing header row");
    if (line.rfind("t,c1,", 0) == 0) s.kind = RunSeries::Kind::becker_doring;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        RunRecord r;
        double* fields[] = {&r.t, &r.theta, &r.G, &r.F, &r.D, &r.w_mass, &r.wp_moment, &r.edge_mass};
        for (std::size_t k = 0; k < 8; ++k) {
            std::string cell;
            if (!std::getline(ls, cell, ','))
                throw ConfigError("Series: row " + std::to_string(row) + " has too few columns");
            char* end = nullptr;
            *fields[k] = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw ConfigError("Series: row " + std::to_string(row) + " has a malformed number");
        }
        s.records.push_back(r);
    }
    return s;
}

}  // namespace bdfp
