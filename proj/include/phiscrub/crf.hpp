#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "phiscrub/corpus.hpp"
#include "phiscrub/tokenize.hpp"

namespace phiscrub {

struct InvalidLabel : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyDataset : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DivergedOptimization : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteValue : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ModelFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TemplateMode { EXTENDED, SHAPE_POS_ONLY };

/// Window radius and template inventory for per-position features.
/// SHAPE_POS_ONLY keeps only casing/shape and POS signals.
struct FeatureTemplateSet {
    TemplateMode mode = TemplateMode::EXTENDED;
    int window = 2;

    bool operator==(const FeatureTemplateSet&) const = default;
};

/// Deterministic feature strings for position t of a tokenized sentence.
std::vector<std::string> extract_features(const std::vector<Token>& sentence,
                                          std::size_t t,
                                          const FeatureTemplateSet& templates);

/// Linear-chain CRF parameters: an ordered BIO tag list, an explicit
/// feature-string index, unary weights (feature x label) and label-transition
/// weights. Weight layout: w[f*L + y] unary, w[F*L + y0*L + y1] transition.
class CrfModel {
  public:
    CrfModel(std::vector<std::string> labels, std::vector<std::string> features,
             FeatureTemplateSet templates);

    int num_labels() const { return static_cast<int>(labels_.size()); }
    int num_features() const { return static_cast<int>(features_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::string>& features() const { return features_; }
    const FeatureTemplateSet& templates() const { return templates_; }

    /// -1 when absent.
    int label_index(std::string_view tag) const;
    int feature_index(std::string_view feature) const;

    Eigen::VectorXd& weights() { return weights_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    std::size_t num_weights() const { return static_cast<std::size_t>(weights_.size()); }

    double transition(int from, int to) const {
        return weights_[static_cast<long>(num_features()) * num_labels() +
                        static_cast<long>(from) * num_labels() + to];
    }

    /// Versioned lossless text container (hexfloat weights).
    void save(std::ostream& out) const;
    static CrfModel load(std::istream& in);
    void save_file(const std::string& path) const;
    static CrfModel load_file(const std::string& path);

  private:
    struct StringHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const {
            return std::hash<std::string_view>{}(s);
        }
    };
    using Index = std::unordered_map<std::string, int, StringHash, std::equal_to<>>;

    std::vector<std::string> labels_;
    std::vector<std::string> features_;
    FeatureTemplateSet templates_;
    Index label_index_;
    Index feature_index_;
    Eigen::VectorXd weights_;
};

/// Per-sentence log potentials: unary is T x L, transition L x L.
struct SentencePotentials {
    Eigen::MatrixXd unary;
    Eigen::MatrixXd transition;
};

SentencePotentials log_potentials(const CrfModel& model,
                                  const std::vector<Token>& sentence);

/// log of the summed exponentiated scores over all labelings (forward pass,
/// log-space throughout).
double log_partition(const SentencePotentials& p);
double log_partition(const CrfModel& model, const std::vector<Token>& sentence);

double sequence_score(const SentencePotentials& p, const std::vector<int>& tags);
/// Throws InvalidLabel on unknown tags or length mismatch.
double sequence_score(const CrfModel& model, const std::vector<Token>& sentence,
                      const std::vector<std::string>& tags);

/// P(y_t = y | sentence) via forward-backward; rows sum to 1.
Eigen::MatrixXd marginals(const SentencePotentials& p);
Eigen::MatrixXd marginals(const CrfModel& model, const std::vector<Token>& sentence);

/// Max-score labeling; ties break toward the lowest label index.
std::pair<std::vector<int>, double> viterbi(const SentencePotentials& p);
std::pair<std::vector<std::string>, double> viterbi(const CrfModel& model,
                                                    const std::vector<Token>& sentence);

/// Sentence pre-encoded against a model's feature/label indices.
struct EncodedSentence {
    std::vector<std::vector<int>> features;  // active feature ids per position
    std::vector<int> gold;                   // label ids, empty when unlabeled
};

/// Unknown features are skipped; unknown gold tags throw InvalidLabel.
EncodedSentence encode_sentence(const CrfModel& model, const BioSequence& seq);

/// Negative log-likelihood of the dataset plus c2*||w||^2, with gradient
/// (expectations minus empirical counts plus 2*c2*w). The L1 term is the
/// optimizer's job, not this function's. Throws NonFiniteValue on overflow.
double objective_and_gradient(const Eigen::VectorXd& w,
                              const std::vector<EncodedSentence>& data,
                              int num_features, int num_labels, double c2,
                              Eigen::VectorXd& grad);

struct TrainConfig {
    double c1 = 0.1;
    double c2 = 1e-3;
    int max_iterations = 100;
    int lbfgs_memory = 6;
    double convergence_tol = 1e-5;
    int min_feature_count = 1;
    FeatureTemplateSet templates;
};

struct TrainLog {
    std::vector<double> objective;  // accepted-iterate values, index 0 = start
    int iterations = 0;
    bool converged = false;
};

/// Quasi-Newton training with orthant-wise handling of the L1 term.
/// Deterministic for a fixed dataset order. Throws EmptyDataset and
/// DivergedOptimization.
CrfModel train(const std::vector<BioSequence>& dataset, const TrainConfig& config,
               TrainLog* log = nullptr);

}  // namespace phiscrub
