#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Adaptive Simpson, absolute tolerance 1e-9, at most 40 levels.
inline double lina_simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                                double fb, double whole, double eps, int depth)
{
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    double floor = 64.0 * 2.220446049250313e-16 * (std::abs(left) + std::abs(right));
    if (std::abs(delta) <= 15.0 * std::max(eps, floor)) return left + right + delta / 15.0;
    if (depth == 0 || !std::isfinite(delta))
        throw std::runtime_error("integral did not converge within 40 subdivisions");
    return lina_simpson_step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
         + lina_simpson_step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

inline double lina_simpson(const std::function<double(double)>& f, double a, double b)
{
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), m = 0.5 * (a + b);
    double fm = f(m);
    return lina_simpson_step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-9, 40);
}

struct integral_result {
    double ret;
};

integral_result integral()
{
    const double ret = lina_simpson([&](double y) { return lina_simpson([&](double x) { return x * y; }, 1LL, 2LL); }, 0LL, 3LL);
    return integral_result{ret};
}
