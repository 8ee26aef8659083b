#include "eigenshift/spectral_core.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace eigenshift {

SymMatrix parse_matrix(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    int p = 0;
    if (!(in >> p) || p < 1)
        throw std::invalid_argument(origin + ": first token must be a positive dimension");
    Eigen::MatrixXd a(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            if (!(in >> a(i, j)))
                throw std::invalid_argument(origin + ": expected " + std::to_string(p * p) + " entries, ran out at row " +
                                            std::to_string(i + 1));
    std::string extra;
    if (in >> extra)
        throw std::invalid_argument(origin + ": trailing content '" + extra + "'");

    const double scale = a.cwiseAbs().maxCoeff();
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-9 * scale)
                throw std::invalid_argument(origin + ": not symmetric at (" + std::to_string(i + 1) + "," +
                                            std::to_string(j + 1) + ")");
    return SymMatrix(a);
}

SymMatrix read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_matrix(ss.str(), path);
}

void write_matrix(const SymMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix file " + path);
    out << a.dim() << '\n' << std::setprecision(17);
    for (int i = 0; i < a.dim(); ++i) {
        for (int j = 0; j < a.dim(); ++j) out << (j ? " " : "") << a(i, j);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace eigenshift
