#include "leach/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace leach {

namespace {

template <typename M>
double asymmetry(const M& a)
{
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

Voigt6 to_mandel(const Voigt6& c)
{
    Voigt6 m = c;
    const double s = std::sqrt(2.0);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) m(i, j) *= (i >= 3 ? s : 1.0) * (j >= 3 ? s : 1.0);
    return m;
}

}  // namespace

double relative_asymmetry(const Mat3& a) { return asymmetry(a); }
double relative_asymmetry(const Voigt6& a) { return asymmetry(a); }

double min_eigenvalue(const Mat3& a)
{
    const Mat3 s = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Mat3> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Mat3& a)
{
    const Mat3 s = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Mat3> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double min_eigenvalue_on_symmetric(const Voigt6& c)
{
    const Voigt6 m = to_mandel(c);
    const Voigt6 s = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Voigt6> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double quadratic_form(const Voigt6& c, const Mat3& e)
{
    double q = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) q += e(a, b) * c(voigt_index(a, b), voigt_index(k, l)) * e(k, l);
    return q;
}

bool is_spd(const Mat3& a)
{
    if (!a.allFinite()) return false;
    const Mat3 s = 0.5 * (a + a.transpose());
    Eigen::LLT<Mat3> llt(s);
    return llt.info() == Eigen::Success;
}

}  // namespace leach
