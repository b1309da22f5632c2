#include <cmath>
#include <deque>
#include <unordered_map>

#include "phiscrub/crf.hpp"

namespace phiscrub {

namespace {

struct Correction {
    Eigen::VectorXd s;
    Eigen::VectorXd y;
    double rho;
};

Eigen::VectorXd pseudo_gradient(const Eigen::VectorXd& w, const Eigen::VectorXd& g,
                                double c1) {
    if (c1 <= 0.0) return g;
    Eigen::VectorXd pg(w.size());
    for (long i = 0; i < w.size(); ++i) {
        if (w[i] > 0.0) pg[i] = g[i] + c1;
        else if (w[i] < 0.0) pg[i] = g[i] - c1;
        else if (g[i] + c1 < 0.0) pg[i] = g[i] + c1;
        else if (g[i] - c1 > 0.0) pg[i] = g[i] - c1;
        else pg[i] = 0.0;
    }
    return pg;
}

/// Two-loop recursion: approximates H * v with the stored corrections.
Eigen::VectorXd lbfgs_direction(const std::deque<Correction>& mem,
                                const Eigen::VectorXd& v) {
    Eigen::VectorXd q = v;
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
        alpha[i] = mem[i].rho * mem[i].s.dot(q);
        q -= alpha[i] * mem[i].y;
    }
    if (!mem.empty()) {
        const auto& last = mem.back();
        q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
        const double beta = mem[i].rho * mem[i].y.dot(q);
        q += (alpha[i] - beta) * mem[i].s;
    }
    return q;
}

}  // namespace

CrfModel train(const std::vector<BioSequence>& dataset, const TrainConfig& config,
               TrainLog* log) {
    std::size_t total_tokens = 0;
    for (const auto& seq : dataset) total_tokens += seq.tokens.size();
    if (total_tokens == 0) throw EmptyDataset("training dataset has no tokens");

    // Harvest labels (O first) and features in first-appearance order.
    std::vector<std::string> labels = {"O"};
    std::unordered_map<std::string, int> seen_labels = {{"O", 0}};
    std::vector<std::string> features;
    std::unordered_map<std::string, int> counts;
    for (const auto& seq : dataset) {
        for (const auto& tag : seq.tags) {
            if (seen_labels.emplace(tag, 1).second) labels.push_back(tag);
        }
        for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
            for (const auto& f : extract_features(seq.tokens, t, config.templates)) {
                auto [it, fresh] = counts.emplace(f, 1);
                if (fresh) features.push_back(f);
                else ++it->second;
            }
        }
    }
    if (config.min_feature_count > 1) {
        std::vector<std::string> kept;
        kept.reserve(features.size());
        for (const auto& f : features)
            if (counts[f] >= config.min_feature_count) kept.push_back(f);
        features = std::move(kept);
    }

    CrfModel model(std::move(labels), std::move(features), config.templates);
    const int L = model.num_labels();
    const int F = model.num_features();

    std::vector<EncodedSentence> encoded;
    encoded.reserve(dataset.size());
    for (const auto& seq : dataset) {
        if (seq.tokens.empty()) continue;
        encoded.push_back(encode_sentence(model, seq));
    }

    const double c1 = config.c1;
    auto l1_norm = [](const Eigen::VectorXd& w) { return w.lpNorm<1>(); };

    Eigen::VectorXd w = Eigen::VectorXd::Zero(model.weights().size());
    Eigen::VectorXd g;
    double smooth = objective_and_gradient(w, encoded, F, L, config.c2, g);
    double value = smooth + c1 * l1_norm(w);
    if (log) {
        log->objective.clear();
        log->objective.push_back(value);
        log->iterations = 0;
        log->converged = false;
    }

    std::deque<Correction> memory;
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        const Eigen::VectorXd pg = pseudo_gradient(w, g, c1);
        if (pg.lpNorm<Eigen::Infinity>() < 1e-12) {
            if (log) log->converged = true;
            break;
        }
        Eigen::VectorXd dir = lbfgs_direction(memory, -pg);
        if (c1 > 0.0) {
            for (long i = 0; i < dir.size(); ++i)
                if (dir[i] * pg[i] >= 0.0) dir[i] = 0.0;  // stay in the orthant model
        }
        if (pg.dot(dir) >= 0.0) dir = -pg;  // fall back to steepest descent

        double step = iter == 1 ? 1.0 / std::max(1.0, dir.norm()) : 1.0;
        constexpr double kSigma = 1e-4;
        bool accepted = false;
        Eigen::VectorXd w_new, g_new;
        double smooth_new = 0.0, value_new = 0.0;
        for (int ls = 0; ls < 60; ++ls) {
            w_new = w + step * dir;
            if (c1 > 0.0) {
                // Project onto the orthant chosen by the pseudo-gradient.
                for (long i = 0; i < w.size(); ++i) {
                    const double xi = w[i] != 0.0 ? w[i] : -pg[i];
                    if (xi > 0.0 ? w_new[i] < 0.0 : (xi < 0.0 && w_new[i] > 0.0))
                        w_new[i] = 0.0;
                }
            }
            try {
                smooth_new =
                    objective_and_gradient(w_new, encoded, F, L, config.c2, g_new);
            } catch (const NonFiniteValue&) {
                step *= 0.5;  // overstepped into overflow, shrink and retry
                continue;
            }
            value_new = smooth_new + c1 * l1_norm(w_new);
            const double gtd = pg.dot(w_new - w);
            if (value_new <= value + kSigma * gtd && gtd < 0.0) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (iter == 1)
                throw DivergedOptimization("line search failed on first iteration");
            break;  // no further progress possible
        }

        Correction corr{w_new - w, g_new - g, 0.0};
        const double sy = corr.s.dot(corr.y);
        if (sy > 1e-10) {
            corr.rho = 1.0 / sy;
            memory.push_back(std::move(corr));
            if (static_cast<int>(memory.size()) > config.lbfgs_memory)
                memory.pop_front();
        }

        const double rel = (value - value_new) /
                           std::max({std::abs(value), std::abs(value_new), 1.0});
        w = std::move(w_new);
        g = std::move(g_new);
        value = value_new;
        if (log) {
            log->objective.push_back(value);
            log->iterations = iter;
        }
        if (rel < config.convergence_tol) {
            if (log) log->converged = true;
            break;
        }
    }

    model.weights() = w;
    return model;
}

}  // namespace phiscrub
