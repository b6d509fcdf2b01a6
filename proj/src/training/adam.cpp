#include <cmath>
#include <limits>

#include "amc/training.hpp"

namespace amc {

template <typename T>
Adam<T>::Adam(std::vector<BasicTensor<T>> params, double learning_rate, double beta1, double beta2, double epsilon)
    : params_(std::move(params)), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    if (!(learning_rate > 0)) throw ConfigError("Adam: learning rate must be positive");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("Adam: betas must lie in [0, 1)");
    for (const auto& p : params_) {
        m_.emplace_back(p.numel(), T(0));
        v_.emplace_back(p.numel(), T(0));
    }
}

template <typename T>
void Adam<T>::step() {
    for (const auto& p : params_)
        if (!p.requires_grad()) throw GraphError("Adam::step: parameter has no gradient buffer");
    ++steps_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
    const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto values = params_[i].values();
        auto grad = std::as_const(params_[i]).grad();
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < values.size(); ++j) {
            m[j] = b1 * m[j] + (T(1) - b1) * grad[j];
            v[j] = b2 * v[j] + (T(1) - b2) * grad[j] * grad[j];
            const double mhat = m[j] / c1;
            const double vhat = v[j] / c2;
            values[j] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
        }
    }
}

template class Adam<float>;
template class Adam<double>;

EarlyStopping::EarlyStopping(std::size_t patience, double tolerance)
    : patience_(patience), tolerance_(tolerance), best_(std::numeric_limits<double>::infinity()) {
    if (patience == 0) throw ConfigError("early stopping patience must be >= 1");
}

bool EarlyStopping::update(double val_loss) {
    ++epochs_;
    if (val_loss < best_ - tolerance_) {
        best_ = val_loss;
        best_epoch_ = epochs_;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

}  // namespace amc
