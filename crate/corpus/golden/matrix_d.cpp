#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

inline Eigen::MatrixXd lina_dense(const std::map<std::vector<long long>, double>& entries, long long rows,
                                  long long cols)
{
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(rows, cols);
    for (const auto& e : entries) r(e.first[0], e.first[1]) = e.second;
    return r;
}

struct matrix_d_result {
    Eigen::MatrixXd D;
    Eigen::MatrixXd ret;
};

matrix_d_result matrix_d(const Eigen::MatrixXd& M, const Eigen::VectorXd& y)
{
    const long long n = static_cast<long long>(M.rows());
    if (M.rows() != n || M.cols() != n)
        throw std::invalid_argument("M: wrong shape");
    if (y.size() != n)
        throw std::invalid_argument("y: wrong length");

    std::map<std::vector<long long>, double> D_entries;
    for (long long i = 1; i <= n; ++i) {
        for (long long j = 1; j <= n; ++j) {
            D_entries[{i - 1, j - 1}] = M(i - 1, j - 1) + 7LL * y(i - 1);
        }
    }
    const Eigen::MatrixXd D = lina_dense(D_entries, n, n);
    return matrix_d_result{D, D};
}
