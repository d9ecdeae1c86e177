#include "ohs/logistic.hpp"

#include <cmath>
#include <limits>

#include "ohs/errors.hpp"

namespace ohs {

Eigen::VectorXd LogisticModel::predict_all(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
    Eigen::VectorXd eta = (X * coef).array() + intercept;
    return eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
}

namespace {

// One IRLS solve at the given penalty. Returns false when the iteration
// drifts into separation territory (unbounded coefficients / non-finite
// working quantities).
bool irls(const Eigen::Ref<const Eigen::MatrixXd>& X,
          const Eigen::Ref<const Eigen::VectorXd>& y, double ridge, int max_iterations,
          LogisticModel& model) {
    const Eigen::Index m = X.rows(), p = X.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);  // [intercept, coef]
    Eigen::MatrixXd Xa(m, p + 1);
    Xa.col(0).setOnes();
    Xa.rightCols(p) = X;

    double prev_obj = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= max_iterations; ++iter) {
        Eigen::VectorXd eta = Xa * beta;
        Eigen::VectorXd p_hat =
            eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
        Eigen::VectorXd w =
            (p_hat.array() * (1.0 - p_hat.array())).cwiseMax(1e-10).matrix();

        Eigen::MatrixXd H = Xa.transpose() * w.asDiagonal() * Xa;
        for (Eigen::Index k = 1; k < p + 1; ++k) H(k, k) += ridge;  // intercept free
        Eigen::VectorXd penalty = Eigen::VectorXd::Zero(p + 1);
        penalty.tail(p) = ridge * beta.tail(p);
        const Eigen::VectorXd grad = Xa.transpose() * (y - p_hat) - penalty;
        const Eigen::VectorXd step = H.ldlt().solve(grad);
        if (!step.allFinite()) return false;
        beta += step;
        if (!beta.allFinite() || beta.norm() > 1e6) return false;

        // Penalized negative log-likelihood for the stopping rule.
        eta = Xa * beta;
        double nll = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
            nll += std::log1p(std::exp(-std::abs(eta[i]))) +
                   (eta[i] > 0 ? (1.0 - y[i]) * eta[i] : -y[i] * eta[i]);
        const double obj = nll + 0.5 * ridge * beta.tail(p).squaredNorm();
        model.iterations = iter;
        if (std::abs(prev_obj - obj) < 1e-10 * (1.0 + std::abs(obj)) ||
            step.norm() < 1e-10 * (1.0 + beta.norm()))
            break;
        prev_obj = obj;
    }
    model.intercept = beta[0];
    model.coef = beta.tail(p);
    return true;
}

}  // namespace

LogisticModel fit_logistic(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y, double ridge,
                           int max_iterations) {
    if (X.rows() != y.size()) throw DomainError("fit_logistic: X rows and y length differ");
    if (X.rows() < 2) throw DomainError("fit_logistic: need at least 2 samples");

    LogisticModel model;
    if (irls(X, y, ridge, max_iterations, model)) return model;

    // Separation: escalate the penalty until the solve is bounded.
    for (double boosted = std::max(ridge, 1e-6) * 100.0; boosted <= 1e3; boosted *= 100.0) {
        if (irls(X, y, boosted, max_iterations, model)) {
            model.stabilized = true;
            return model;
        }
    }
    throw FitFailureError("fit_logistic: IRLS diverged even with heavy ridge penalty");
}

}  // namespace ohs
