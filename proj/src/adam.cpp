#include "shapemap/adam.hpp"

#include <cmath>

namespace shapemap {

void AdamState::step(std::vector<Tensor>& params, const std::vector<double>& weight_decay) {
    if (!weight_decay.empty() && weight_decay.size() != params.size())
        throw ConfigError("adam: weight_decay list must match parameter count");
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i].data().size(), 0.0);
            v_[i].assign(params[i].data().size(), 0.0);
        }
    } else if (m_.size() != params.size()) {
        throw ConfigError("adam: parameter count changed between steps");
    }

    ++step_;
    const double b1t = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double b2t = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (size_t i = 0; i < params.size(); ++i) {
        auto& theta = params[i].data();
        const auto& grad = params[i].grad();
        if (m_[i].size() != theta.size())
            throw ConfigError("adam: parameter " + std::to_string(i) + " changed size");
        const double decay = weight_decay.empty() ? 0.0 : weight_decay[i];
        for (size_t j = 0; j < theta.size(); ++j) {
            const double g = grad[j] + decay * theta[j];
            m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g;
            v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g * g;
            const double mhat = m_[i][j] / b1t;
            const double vhat = v_[i][j] / b2t;
            theta[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

void adam_step(std::vector<Tensor>& params, AdamState& state,
               const std::vector<double>& weight_decay) {
    state.step(params, weight_decay);
}

}  // namespace shapemap
