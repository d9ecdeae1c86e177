#pragma once

#include <Eigen/Dense>

namespace ohs {

/// Ridge-stabilized logistic regression fitted by iteratively reweighted
/// least squares. The intercept is handled internally and never penalized.
/// Separation (diverging coefficients or a stalled deviance) triggers a
/// refit with an escalated ridge penalty, reported via `stabilized`.
struct LogisticModel {
    double intercept = 0.0;
    Eigen::VectorXd coef;
    bool stabilized = false;
    int iterations = 0;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        const double eta = intercept + x.dot(coef.transpose());
        return 1.0 / (1.0 + std::exp(-eta));
    }

    Eigen::VectorXd predict_all(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
};

/// Fit on rows of X (no intercept column) against y in {0,1}.
LogisticModel fit_logistic(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y,
                           double ridge = 1e-6, int max_iterations = 60);

}  // namespace ohs
