#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <set>
#include <sstream>

#include "phiscrub/crf.hpp"
#include "phiscrub/rng.hpp"

using namespace phiscrub;

namespace {

// Independent oracle: enumerate all L^T labelings against dense potentials.
struct BruteForce {
    double log_z;
    std::vector<int> best_path;
    double best_score;
    Eigen::MatrixXd marg;  // T x L
};

double path_score(const SentencePotentials& p, const std::vector<int>& path) {
    double s = p.unary(0, path[0]);
    for (std::size_t t = 1; t < path.size(); ++t)
        s += p.transition(path[t - 1], path[t]) + p.unary(static_cast<long>(t), path[t]);
    return s;
}

BruteForce brute_force(const SentencePotentials& p) {
    const int T = static_cast<int>(p.unary.rows());
    const int L = static_cast<int>(p.unary.cols());
    BruteForce out;
    out.best_score = -1e300;
    out.marg = Eigen::MatrixXd::Zero(T, L);

    std::vector<int> path(T, 0);
    std::vector<double> scores;
    std::vector<std::vector<int>> paths;
    while (true) {
        const double s = path_score(p, path);
        scores.push_back(s);
        paths.push_back(path);
        if (s > out.best_score) {
            out.best_score = s;
            out.best_path = path;
        }
        int t = T - 1;
        while (t >= 0 && ++path[t] == L) path[t--] = 0;
        if (t < 0) break;
    }
    double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double s : scores) sum += std::exp(s - mx);
    out.log_z = mx + std::log(sum);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const double prob = std::exp(scores[i] - out.log_z);
        for (int t = 0; t < T; ++t) out.marg(t, paths[i][t]) += prob;
    }
    return out;
}

SentencePotentials random_potentials(Rng& rng, int T, int L, double scale = 4.0) {
    SentencePotentials p;
    p.unary = Eigen::MatrixXd(T, L);
    p.transition = Eigen::MatrixXd(L, L);
    for (int t = 0; t < T; ++t)
        for (int l = 0; l < L; ++l) p.unary(t, l) = (rng.unit() - 0.5) * scale;
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) p.transition(a, b) = (rng.unit() - 0.5) * scale;
    return p;
}

Token word(const std::string& s) {
    Token t;
    t.text = s;
    t.shape = word_shape(s);
    return t;
}

std::vector<BioSequence> toy_dataset() {
    // Separable: capitalized surnames after "Dr" are NAME, digits are DATE.
    std::vector<BioSequence> data;
    const std::vector<std::string> names = {
        "Smith", "Jones", "Baker", "Clark", "Davis", "Evans", "Frank",
        "Green", "Hayes", "Irwin", "James", "Kelly", "Lopez", "Mason",
        "Nolan", "Owens", "Perez", "Quinn", "Reyes", "Stone",
    };
    for (std::size_t i = 0; i < names.size(); ++i) {
        BioSequence seq;
        seq.tokens = {word("Dr"), word(names[i]), word("came"), word("on"),
                      word("19" + std::to_string(70 + i))};
        for (auto& t : seq.tokens) {
            t.start = 0;
            t.end = 1;
        }
        pos_tag(seq.tokens);
        seq.tags = {"O", "B-NAME", "O", "O", "B-DATE"};
        data.push_back(std::move(seq));
    }
    return data;
}

}  // namespace

TEST_CASE("viterbi and log partition match brute force") {
    Rng rng(401);
    for (int round = 0; round < 100; ++round) {
        const int T = 1 + static_cast<int>(rng.below(6));
        const int L = 1 + static_cast<int>(rng.below(4));
        const auto p = random_potentials(rng, T, L);
        const auto oracle = brute_force(p);

        CHECK(log_partition(p) == doctest::Approx(oracle.log_z).epsilon(1e-10));

        const auto [path, score] = viterbi(p);
        CHECK(score == doctest::Approx(oracle.best_score).epsilon(1e-10));
        CHECK(path_score(p, path) == doctest::Approx(oracle.best_score).epsilon(1e-10));

        const auto m = marginals(p);
        for (int t = 0; t < T; ++t) {
            CHECK(m.row(t).sum() == doctest::Approx(1.0).epsilon(1e-9));
            for (int l = 0; l < L; ++l)
                CHECK(m(t, l) == doctest::Approx(oracle.marg(t, l)).epsilon(1e-8));
        }
    }
}

TEST_CASE("viterbi ties break toward the lowest label index") {
    SentencePotentials p;
    p.unary = Eigen::MatrixXd::Zero(3, 3);
    p.transition = Eigen::MatrixXd::Zero(3, 3);
    const auto [path, score] = viterbi(p);
    CHECK(path == std::vector<int>{0, 0, 0});
    CHECK(score == doctest::Approx(0.0));
}

TEST_CASE("decode is invariant to constant potential shifts") {
    Rng rng(402);
    for (int round = 0; round < 50; ++round) {
        const int T = 2 + static_cast<int>(rng.below(5));
        const int L = 2 + static_cast<int>(rng.below(3));
        auto p = random_potentials(rng, T, L);
        const auto [path, score] = viterbi(p);
        auto q = p;
        q.unary.array() += 7.25;
        const auto [path2, score2] = viterbi(q);
        CHECK(path == path2);
        CHECK(score2 == doctest::Approx(score + 7.25 * T).epsilon(1e-9));
        const auto m = marginals(p);
        const auto m2 = marginals(q);
        CHECK((m - m2).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("sequence probabilities normalize") {
    Rng rng(403);
    const auto p = random_potentials(rng, 4, 3);
    const double logz = log_partition(p);
    double total = 0.0;
    std::vector<int> path(4, 0);
    while (true) {
        total += std::exp(sequence_score(p, path) - logz);
        int t = 3;
        while (t >= 0 && ++path[t] == 3) path[t--] = 0;
        if (t < 0) break;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("gradient matches central finite differences") {
    Rng rng(404);
    // Three random sentences with enough lexical variety for >= 200 features.
    static const std::vector<std::string> words = {
        "Smith", "jones", "BAKER", "visit", "2021", "x9",   "ward", "Dr",
        "flu",   "12-05", "note",  "Acme",  "blue", "semi", "iv",   "scan",
    };
    static const std::vector<std::string> tag_pool = {"O", "B-NAME", "I-NAME",
                                                      "B-DATE"};
    std::vector<BioSequence> three;
    for (int s = 0; s < 3; ++s) {
        BioSequence seq;
        for (int t = 0; t < 18; ++t) {
            seq.tokens.push_back(word(rng.pick(words)));
            seq.tags.push_back(s == 0 && t < 4 ? tag_pool[static_cast<std::size_t>(t)]
                                               : rng.pick(tag_pool));
        }
        pos_tag(seq.tokens);
        three.push_back(std::move(seq));
    }

    FeatureTemplateSet tpl;
    std::vector<std::string> features;
    std::set<std::string> seen;
    for (const auto& seq : three)
        for (std::size_t t = 0; t < seq.tokens.size(); ++t)
            for (const auto& f : extract_features(seq.tokens, t, tpl))
                if (seen.insert(f).second) features.push_back(f);
    CrfModel model({"O", "B-NAME", "I-NAME", "B-DATE"}, features, tpl);
    REQUIRE(model.num_features() >= 200);

    std::vector<EncodedSentence> encoded;
    for (const auto& seq : three) encoded.push_back(encode_sentence(model, seq));

    const int F = model.num_features();
    const int L = model.num_labels();
    Eigen::VectorXd w(model.num_weights());
    for (long i = 0; i < w.size(); ++i) w[i] = (rng.unit() - 0.5) * 0.8;

    Eigen::VectorXd grad;
    objective_and_gradient(w, encoded, F, L, 1e-3, grad);

    const double h = 1e-5;
    Eigen::VectorXd dummy;
    int checked = 0;
    for (long i = 0; i < w.size(); i += std::max<long>(1, w.size() / 400)) {
        Eigen::VectorXd wp = w, wm = w;
        wp[i] += h;
        wm[i] -= h;
        const double fd = (objective_and_gradient(wp, encoded, F, L, 1e-3, dummy) -
                           objective_and_gradient(wm, encoded, F, L, 1e-3, dummy)) /
                          (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
        CHECK(std::abs(fd - grad[i]) / denom <= 1e-4);
        ++checked;
    }
    CHECK(checked >= 200);
}

TEST_CASE("training separates a toy dataset with default settings") {
    const auto data = toy_dataset();
    TrainConfig config;  // c1 = 0.1, c2 = 1e-3, 100 iterations
    TrainLog log;
    CrfModel model = train(data, config, &log);

    for (std::size_t i = 1; i < log.objective.size(); ++i)
        CHECK(log.objective[i] <= log.objective[i - 1] + 1e-9);

    std::size_t correct = 0, total = 0;
    for (const auto& seq : data) {
        const auto [tags, score] = viterbi(model, seq.tokens);
        for (std::size_t t = 0; t < tags.size(); ++t) {
            ++total;
            if (tags[t] == seq.tags[t]) ++correct;
        }
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("L1 strength controls sparsity") {
    const auto data = toy_dataset();
    TrainConfig dense_cfg;
    dense_cfg.c1 = 0.0;
    TrainConfig sparse_cfg;
    sparse_cfg.c1 = 10.0;
    CrfModel dense = train(data, dense_cfg);
    CrfModel sparse = train(data, sparse_cfg);
    auto nonzero = [](const CrfModel& m) {
        long n = 0;
        for (long i = 0; i < m.weights().size(); ++i)
            if (m.weights()[i] != 0.0) ++n;
        return n;
    };
    CHECK(nonzero(sparse) < nonzero(dense));
}

TEST_CASE("model save/load round trip is lossless") {
    const auto data = toy_dataset();
    TrainConfig config;
    config.max_iterations = 15;
    CrfModel model = train(data, config);

    std::stringstream buf;
    model.save(buf);
    CrfModel loaded = CrfModel::load(buf);
    CHECK(loaded.labels() == model.labels());
    CHECK(loaded.features() == model.features());
    CHECK(loaded.templates() == model.templates());
    REQUIRE(loaded.weights().size() == model.weights().size());
    for (long i = 0; i < model.weights().size(); ++i)
        CHECK(loaded.weights()[i] == model.weights()[i]);

    std::istringstream bad("not a model");
    CHECK_THROWS_AS(CrfModel::load(bad), ModelFormatError);
}

TEST_CASE("feature extraction is positional and deterministic") {
    auto data = toy_dataset();
    const auto& toks = data[0].tokens;
    FeatureTemplateSet tpl;
    const auto f0 = extract_features(toks, 0, tpl);
    const auto f1 = extract_features(toks, 1, tpl);
    CHECK(f0 != f1);
    CHECK(extract_features(toks, 0, tpl) == f0);
    bool has_bos = false, has_shape = false;
    for (const auto& f : f0) {
        if (f == "BOS") has_bos = true;
        if (f.rfind("sh[0]=", 0) == 0) has_shape = true;
    }
    CHECK(has_bos);
    CHECK(has_shape);

    FeatureTemplateSet strict;
    strict.mode = TemplateMode::SHAPE_POS_ONLY;
    for (const auto& f : extract_features(toks, 1, strict))
        CHECK(f.rfind("w[", 0) != 0);  // no lexical identity features
}

TEST_CASE("training rejects an empty dataset") {
    CHECK_THROWS_AS(train({}, TrainConfig{}), EmptyDataset);
    BioSequence empty;
    CHECK_THROWS_AS(train({empty}, TrainConfig{}), EmptyDataset);
}
