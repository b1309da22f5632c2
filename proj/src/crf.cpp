#include "phiscrub/crf.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace phiscrub {

namespace {

void ascii_lower_into(std::string& buf, const std::string& s) {
    buf = s;
    for (char& c : buf)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
}

bool is_title_word(const std::string& s) {
    return !s.empty() && s[0] >= 'A' && s[0] <= 'Z';
}

bool is_all_upper(const std::string& s) {
    bool has_letter = false;
    for (unsigned char c : s) {
        if (c >= 'a' && c <= 'z') return false;
        if (c >= 'A' && c <= 'Z') has_letter = true;
    }
    return has_letter;
}

bool is_all_digit(const std::string& s) {
    if (s.empty()) return false;
    for (unsigned char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

void append_int(std::string& buf, int d) {
    char tmp[8];
    std::snprintf(tmp, sizeof tmp, "%d", d);
    buf += tmp;
}

/// Shared feature enumeration; fn receives each feature as a string_view into
/// a reused buffer. Emission order is fixed.
template <typename Fn>
void for_each_feature(const std::vector<Token>& sentence, std::size_t t,
                      const FeatureTemplateSet& templates, Fn&& fn) {
    const int T = static_cast<int>(sentence.size());
    const int pos = static_cast<int>(t);
    const bool extended = templates.mode == TemplateMode::EXTENDED;
    std::string buf;
    std::string lower;
    for (int d = -templates.window; d <= templates.window; ++d) {
        const int i = pos + d;
        if (i < 0 || i >= T) continue;
        const Token& tok = sentence[static_cast<std::size_t>(i)];
        if (extended) {
            ascii_lower_into(lower, tok.text);
            buf = "w[";
            append_int(buf, d);
            buf += "]=";
            buf += lower;
            fn(std::string_view(buf));
        }
        buf = "sh[";
        append_int(buf, d);
        buf += "]=";
        buf += tok.shape;
        fn(std::string_view(buf));
        buf = "p[";
        append_int(buf, d);
        buf += "]=";
        buf += pos_name(tok.pos);
        fn(std::string_view(buf));
        if (is_title_word(tok.text)) {
            buf = "ttl[";
            append_int(buf, d);
            buf += "]";
            fn(std::string_view(buf));
        }
        if (is_all_upper(tok.text)) {
            buf = "up[";
            append_int(buf, d);
            buf += "]";
            fn(std::string_view(buf));
        }
        if (is_all_digit(tok.text)) {
            buf = "dg[";
            append_int(buf, d);
            buf += "]";
            fn(std::string_view(buf));
        }
    }
    if (extended) {
        const Token& center = sentence[t];
        ascii_lower_into(lower, center.text);
        for (std::size_t k : {std::size_t{2}, std::size_t{3}}) {
            if (lower.size() >= k) {
                buf = "pre";
                append_int(buf, static_cast<int>(k));
                buf += "=";
                buf.append(lower, 0, k);
                fn(std::string_view(buf));
                buf = "suf";
                append_int(buf, static_cast<int>(k));
                buf += "=";
                buf.append(lower, lower.size() - k, k);
                fn(std::string_view(buf));
            }
        }
    }
    if (pos == 0) fn(std::string_view("BOS"));
    if (pos == T - 1) fn(std::string_view("EOS"));
}

}  // namespace

std::vector<std::string> extract_features(const std::vector<Token>& sentence,
                                          std::size_t t,
                                          const FeatureTemplateSet& templates) {
    std::vector<std::string> out;
    for_each_feature(sentence, t, templates,
                     [&](std::string_view f) { out.emplace_back(f); });
    return out;
}

CrfModel::CrfModel(std::vector<std::string> labels, std::vector<std::string> features,
                   FeatureTemplateSet templates)
    : labels_(std::move(labels)), features_(std::move(features)),
      templates_(templates) {
    if (labels_.empty()) throw InvalidLabel("model needs at least one label");
    for (std::size_t i = 0; i < labels_.size(); ++i)
        label_index_.emplace(labels_[i], static_cast<int>(i));
    for (std::size_t i = 0; i < features_.size(); ++i)
        feature_index_.emplace(features_[i], static_cast<int>(i));
    if (label_index_.size() != labels_.size())
        throw InvalidLabel("duplicate label in model");
    if (feature_index_.size() != features_.size())
        throw ModelFormatError("duplicate feature in model");
    weights_ = Eigen::VectorXd::Zero(
        static_cast<long>(features_.size()) * static_cast<long>(labels_.size()) +
        static_cast<long>(labels_.size()) * static_cast<long>(labels_.size()));
}

int CrfModel::label_index(std::string_view tag) const {
    auto it = label_index_.find(tag);
    return it == label_index_.end() ? -1 : it->second;
}

int CrfModel::feature_index(std::string_view feature) const {
    auto it = feature_index_.find(feature);
    return it == feature_index_.end() ? -1 : it->second;
}

SentencePotentials log_potentials(const CrfModel& model,
                                  const std::vector<Token>& sentence) {
    const int L = model.num_labels();
    const int T = static_cast<int>(sentence.size());
    const auto& w = model.weights();
    SentencePotentials p;
    p.unary = Eigen::MatrixXd::Zero(T, L);
    for (int t = 0; t < T; ++t) {
        for_each_feature(sentence, static_cast<std::size_t>(t), model.templates(),
                         [&](std::string_view f) {
                             const int id = model.feature_index(f);
                             if (id >= 0)
                                 p.unary.row(t) +=
                                     w.segment(static_cast<long>(id) * L, L).transpose();
                         });
    }
    p.transition = Eigen::MatrixXd(L, L);
    const long base = static_cast<long>(model.num_features()) * L;
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b)
            p.transition(a, b) = w[base + static_cast<long>(a) * L + b];
    return p;
}

namespace {

double logsumexp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
    const double m = v.maxCoeff();
    return m + std::log((v.array() - m).exp().sum());
}

/// Forward recursion; returns T x L log-alpha.
Eigen::MatrixXd forward(const SentencePotentials& p) {
    const int T = static_cast<int>(p.unary.rows());
    const int L = static_cast<int>(p.unary.cols());
    Eigen::MatrixXd alpha(T, L);
    alpha.row(0) = p.unary.row(0);
    for (int t = 1; t < T; ++t) {
        const Eigen::ArrayXd prev = alpha.row(t - 1).transpose().array();
        const double c = prev.maxCoeff();
        const Eigen::ArrayXXd shifted =
            (p.transition.array().colwise() + (prev - c)).exp();
        const Eigen::RowVectorXd lse = shifted.colwise().sum().log().matrix();
        alpha.row(t) = p.unary.row(t) + lse + Eigen::RowVectorXd::Constant(L, c);
    }
    return alpha;
}

/// Backward recursion; returns T x L log-beta.
Eigen::MatrixXd backward(const SentencePotentials& p) {
    const int T = static_cast<int>(p.unary.rows());
    const int L = static_cast<int>(p.unary.cols());
    Eigen::MatrixXd beta(T, L);
    beta.row(T - 1).setZero();
    for (int t = T - 2; t >= 0; --t) {
        const Eigen::ArrayXd nxt =
            (p.unary.row(t + 1) + beta.row(t + 1)).transpose().array();
        const double c = nxt.maxCoeff();
        const Eigen::ArrayXXd shifted =
            (p.transition.array().rowwise() + (nxt - c).transpose()).exp();
        const Eigen::VectorXd lse = shifted.rowwise().sum().log().matrix();
        beta.row(t) = lse.transpose() + Eigen::RowVectorXd::Constant(L, c);
    }
    return beta;
}

}  // namespace

double log_partition(const SentencePotentials& p) {
    if (p.unary.rows() < 1) throw InvalidLabel("empty sentence");
    const Eigen::MatrixXd alpha = forward(p);
    return logsumexp(alpha.row(alpha.rows() - 1));
}

double log_partition(const CrfModel& model, const std::vector<Token>& sentence) {
    return log_partition(log_potentials(model, sentence));
}

double sequence_score(const SentencePotentials& p, const std::vector<int>& tags) {
    const int T = static_cast<int>(p.unary.rows());
    if (static_cast<int>(tags.size()) != T)
        throw InvalidLabel("tag/position count mismatch");
    double score = 0.0;
    for (int t = 0; t < T; ++t) {
        if (tags[t] < 0 || tags[t] >= p.unary.cols())
            throw InvalidLabel("label index out of range");
        score += p.unary(t, tags[t]);
        if (t > 0) score += p.transition(tags[t - 1], tags[t]);
    }
    return score;
}

double sequence_score(const CrfModel& model, const std::vector<Token>& sentence,
                      const std::vector<std::string>& tags) {
    std::vector<int> ids;
    ids.reserve(tags.size());
    for (const auto& tag : tags) {
        const int id = model.label_index(tag);
        if (id < 0) throw InvalidLabel("unknown label: " + tag);
        ids.push_back(id);
    }
    return sequence_score(log_potentials(model, sentence), ids);
}

Eigen::MatrixXd marginals(const SentencePotentials& p) {
    const Eigen::MatrixXd alpha = forward(p);
    const Eigen::MatrixXd beta = backward(p);
    const double logz = logsumexp(alpha.row(alpha.rows() - 1));
    return (alpha + beta).array().exp().matrix() * std::exp(-logz);
}

Eigen::MatrixXd marginals(const CrfModel& model, const std::vector<Token>& sentence) {
    return marginals(log_potentials(model, sentence));
}

std::pair<std::vector<int>, double> viterbi(const SentencePotentials& p) {
    const int T = static_cast<int>(p.unary.rows());
    const int L = static_cast<int>(p.unary.cols());
    if (T < 1) throw InvalidLabel("empty sentence");
    Eigen::MatrixXd best(T, L);
    Eigen::MatrixXi back(T, L);
    best.row(0) = p.unary.row(0);
    for (int t = 1; t < T; ++t) {
        for (int y = 0; y < L; ++y) {
            int arg = 0;
            double v = best(t - 1, 0) + p.transition(0, y);
            for (int y0 = 1; y0 < L; ++y0) {
                const double cand = best(t - 1, y0) + p.transition(y0, y);
                if (cand > v) {  // strict: ties keep the lowest index
                    v = cand;
                    arg = y0;
                }
            }
            best(t, y) = v + p.unary(t, y);
            back(t, y) = arg;
        }
    }
    int last = 0;
    double score = best(T - 1, 0);
    for (int y = 1; y < L; ++y) {
        if (best(T - 1, y) > score) {
            score = best(T - 1, y);
            last = y;
        }
    }
    std::vector<int> tags(static_cast<std::size_t>(T));
    tags[static_cast<std::size_t>(T) - 1] = last;
    for (int t = T - 1; t > 0; --t)
        tags[static_cast<std::size_t>(t) - 1] = back(t, tags[static_cast<std::size_t>(t)]);
    return {std::move(tags), score};
}

std::pair<std::vector<std::string>, double> viterbi(const CrfModel& model,
                                                    const std::vector<Token>& sentence) {
    auto [ids, score] = viterbi(log_potentials(model, sentence));
    std::vector<std::string> tags;
    tags.reserve(ids.size());
    for (int id : ids) tags.push_back(model.labels()[static_cast<std::size_t>(id)]);
    return {std::move(tags), score};
}

EncodedSentence encode_sentence(const CrfModel& model, const BioSequence& seq) {
    EncodedSentence enc;
    enc.features.resize(seq.tokens.size());
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
        for_each_feature(seq.tokens, t, model.templates(), [&](std::string_view f) {
            const int id = model.feature_index(f);
            if (id >= 0) enc.features[t].push_back(id);
        });
    }
    if (!seq.tags.empty()) {
        if (seq.tags.size() != seq.tokens.size())
            throw InvalidLabel("tag/token count mismatch");
        for (const auto& tag : seq.tags) {
            const int id = model.label_index(tag);
            if (id < 0) throw InvalidLabel("unknown label: " + tag);
            enc.gold.push_back(id);
        }
    }
    return enc;
}

double objective_and_gradient(const Eigen::VectorXd& w,
                              const std::vector<EncodedSentence>& data,
                              int num_features, int num_labels, double c2,
                              Eigen::VectorXd& grad) {
    const int L = num_labels;
    const long unary_size = static_cast<long>(num_features) * L;
    grad = Eigen::VectorXd::Zero(w.size());
    double value = 0.0;

    SentencePotentials p;
    p.transition = Eigen::MatrixXd(L, L);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b)
            p.transition(a, b) = w[unary_size + static_cast<long>(a) * L + b];

    for (const auto& sent : data) {
        const int T = static_cast<int>(sent.features.size());
        if (T == 0) continue;
        p.unary = Eigen::MatrixXd::Zero(T, L);
        for (int t = 0; t < T; ++t)
            for (int f : sent.features[static_cast<std::size_t>(t)])
                p.unary.row(t) += w.segment(static_cast<long>(f) * L, L).transpose();

        const Eigen::MatrixXd alpha = forward(p);
        const Eigen::MatrixXd beta = backward(p);
        const double logz = logsumexp(alpha.row(T - 1));

        double gold_score = 0.0;
        for (int t = 0; t < T; ++t) {
            gold_score += p.unary(t, sent.gold[static_cast<std::size_t>(t)]);
            if (t > 0)
                gold_score += p.transition(sent.gold[static_cast<std::size_t>(t) - 1],
                                           sent.gold[static_cast<std::size_t>(t)]);
        }
        value += logz - gold_score;

        // node expectations minus empirical counts
        for (int t = 0; t < T; ++t) {
            const Eigen::RowVectorXd prob =
                (alpha.row(t) + beta.row(t)).array().exp().matrix() * std::exp(-logz);
            for (int f : sent.features[static_cast<std::size_t>(t)])
                grad.segment(static_cast<long>(f) * L, L) += prob.transpose();
            for (int f : sent.features[static_cast<std::size_t>(t)])
                grad[static_cast<long>(f) * L + sent.gold[static_cast<std::size_t>(t)]] -=
                    1.0;
        }
        // edge expectations minus empirical counts
        for (int t = 1; t < T; ++t) {
            Eigen::MatrixXd m = p.transition;
            m.colwise() += alpha.row(t - 1).transpose();
            m.rowwise() += p.unary.row(t) + beta.row(t);
            m.array() -= logz;
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
                gtr(grad.data() + unary_size, L, L);
            gtr += m.array().exp().matrix();
            grad[unary_size +
                 static_cast<long>(sent.gold[static_cast<std::size_t>(t) - 1]) * L +
                 sent.gold[static_cast<std::size_t>(t)]] -= 1.0;
        }
    }

    value += c2 * w.squaredNorm();
    grad += 2.0 * c2 * w;
    if (!std::isfinite(value)) throw NonFiniteValue("objective is not finite");
    return value;
}

void CrfModel::save(std::ostream& out) const {
    out << "phiscrub-crf 1\n";
    out << "templates " << (templates_.mode == TemplateMode::EXTENDED ? "EXTENDED"
                                                                      : "SHAPE_POS_ONLY")
        << " " << templates_.window << "\n";
    out << "labels " << labels_.size() << "\n";
    for (const auto& l : labels_) out << l << "\n";
    out << "features " << features_.size() << "\n";
    for (const auto& f : features_) out << f << "\n";
    out << "weights " << weights_.size() << "\n";
    char buf[40];
    for (long i = 0; i < weights_.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%a\n", weights_[i]);
        out << buf;
    }
    out << "end\n";
}

CrfModel CrfModel::load(std::istream& in) {
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "phiscrub-crf" || version != 1)
        throw ModelFormatError("not a phiscrub-crf v1 model");
    FeatureTemplateSet templates;
    std::string mode;
    if (!(in >> word >> mode >> templates.window) || word != "templates")
        throw ModelFormatError("missing templates header");
    if (mode == "EXTENDED") templates.mode = TemplateMode::EXTENDED;
    else if (mode == "SHAPE_POS_ONLY") templates.mode = TemplateMode::SHAPE_POS_ONLY;
    else throw ModelFormatError("unknown template mode: " + mode);

    std::size_t n = 0;
    if (!(in >> word >> n) || word != "labels")
        throw ModelFormatError("missing labels header");
    in.ignore();
    std::vector<std::string> labels(n);
    for (auto& l : labels)
        if (!std::getline(in, l)) throw ModelFormatError("truncated label list");
    if (!(in >> word >> n) || word != "features")
        throw ModelFormatError("missing features header");
    in.ignore();
    std::vector<std::string> features(n);
    for (auto& f : features)
        if (!std::getline(in, f)) throw ModelFormatError("truncated feature list");

    CrfModel model(std::move(labels), std::move(features), templates);
    long wn = 0;
    if (!(in >> word >> wn) || word != "weights" || wn != model.weights_.size())
        throw ModelFormatError("weight count mismatch");
    std::string tok;
    for (long i = 0; i < wn; ++i) {
        if (!(in >> tok)) throw ModelFormatError("truncated weights");
        model.weights_[i] = std::strtod(tok.c_str(), nullptr);
    }
    if (!(in >> word) || word != "end") throw ModelFormatError("missing end marker");
    return model;
}

void CrfModel::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    save(out);
}

CrfModel CrfModel::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError("cannot open model file: " + path);
    return load(in);
}

}  // namespace phiscrub
