#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

inline void lina_require(bool ok, const std::string& what)
{
    if (!ok) throw std::domain_error(what);
}

inline Eigen::MatrixXd lina_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.rows() != a.cols()) throw std::invalid_argument("solve needs a square matrix");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lina_require(lu.isInvertible(), "matrix is singular");
    return lu.solve(b);
}

template <typename T>
std::vector<T> lina_sequence(const std::map<std::vector<long long>, T>& entries, long long n)
{
    std::vector<T> r;
    for (long long k = 0; k < n; ++k) {
        auto it = entries.find({k});
        if (it == entries.end()) throw std::domain_error("element " + std::to_string(k + 1) + " is never defined");
        r.push_back(it->second);
    }
    return r;
}

struct closest_point_result {
    std::vector<Eigen::Matrix<double, 3, 3>> P;
    Eigen::Matrix<double, 3, 1> q;
    Eigen::Matrix<double, 3, 1> ret;
};

closest_point_result closest_point(const std::vector<Eigen::Matrix<double, 3, 1>>& p, const std::vector<Eigen::Matrix<double, 3, 1>>& d)
{
    const long long len_i = static_cast<long long>(p.size());
    if (static_cast<long long>(d.size()) != len_i)
        throw std::invalid_argument("d: wrong number of elements");

    std::map<std::vector<long long>, Eigen::Matrix<double, 3, 3>> P_entries;
    for (long long i = 1; i <= len_i; ++i) {
        P_entries[{i - 1}] = Eigen::MatrixXd::Identity(3, 3) - d[i - 1] * d[i - 1].transpose();
    }
    const std::vector<Eigen::Matrix<double, 3, 3>> P = lina_sequence(P_entries, len_i);
    const Eigen::Matrix<double, 3, 1> q = Eigen::VectorXd(lina_solve([&]() { Eigen::Matrix<double, 3, 3> acc = Eigen::MatrixXd::Zero(3, 3); for (long long i = 1; i <= len_i; ++i) acc += P[i - 1]; return acc; }(), [&]() { Eigen::Matrix<double, 3, 1> acc = Eigen::VectorXd::Zero(3); for (long long i = 1; i <= len_i; ++i) acc += P[i - 1] * p[i - 1]; return acc; }()));
    return closest_point_result{P, q, q};
}
