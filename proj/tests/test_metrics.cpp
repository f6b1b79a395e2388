#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "nnn/metrics.hpp"
#include "nnn/rng.hpp"

using namespace nnn;

namespace {

LabeledDataset labels_only(const std::vector<std::size_t>& classes, std::size_t n_classes) {
    LabeledDataset d;
    d.n_rows = classes.size();
    d.n_cols = 1;
    d.n_classes = n_classes;
    d.features.assign(d.n_rows, 0.0);
    d.labels.assign(d.n_rows * n_classes, 0.0);
    for (std::size_t r = 0; r < d.n_rows; ++r) d.labels[r * n_classes + classes[r]] = 1.0;
    return d;
}

// Mann-Whitney AUC with half credit for ties: the probability a random
// positive outscores a random negative.
double auc_by_pairs(const std::vector<double>& score, const std::vector<bool>& pos) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t p = 0; p < score.size(); ++p) {
        if (!pos[p]) continue;
        for (std::size_t n = 0; n < score.size(); ++n) {
            if (pos[n]) continue;
            pairs += 1.0;
            if (score[p] > score[n]) wins += 1.0;
            else if (score[p] == score[n]) wins += 0.5;
        }
    }
    return pairs == 0.0 ? 0.0 : wins / pairs;
}

// AP by enumerating every distinct score threshold from high to low.
double ap_by_thresholds(const std::vector<double>& score, const std::vector<bool>& pos) {
    std::set<double, std::greater<double>> cuts(score.begin(), score.end());
    double n_pos = 0.0;
    for (bool b : pos) n_pos += b;
    double ap = 0.0, prev_recall = 0.0;
    for (double t : cuts) {
        double tp = 0.0, fp = 0.0;
        for (std::size_t i = 0; i < score.size(); ++i)
            if (score[i] >= t) (pos[i] ? tp : fp) += 1.0;
        const double recall = n_pos == 0.0 ? 0.0 : tp / n_pos;
        const double precision = tp + fp == 0.0 ? 1.0 : tp / (tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

struct Fixture {
    std::vector<double> scores; // n x k row-major
    LabeledDataset data;
};

Fixture random_fixture(std::size_t n, std::size_t k, std::uint64_t seed, bool quantized) {
    Rng rng(seed);
    std::vector<std::size_t> classes;
    std::vector<double> scores;
    for (std::size_t r = 0; r < n; ++r) {
        classes.push_back(rng.index(k));
        for (std::size_t c = 0; c < k; ++c) {
            double s = rng.uniform();
            if (quantized) s = std::floor(s * 4.0) / 4.0; // forces plenty of ties
            scores.push_back(s);
        }
    }
    return {scores, labels_only(classes, k)};
}

std::vector<double> column(const std::vector<double>& scores, std::size_t k, std::size_t cls) {
    std::vector<double> out;
    for (std::size_t i = cls; i < scores.size(); i += k) out.push_back(scores[i]);
    return out;
}

std::vector<bool> positives(const LabeledDataset& d, std::size_t cls) {
    std::vector<bool> out;
    for (std::size_t r = 0; r < d.n_rows; ++r) out.push_back(d.label_index(r) == cls);
    return out;
}

} // namespace

TEST_CASE("accuracy on a hand fixture with argmax ties") {
    const auto d = labels_only({0, 1, 2, 0}, 3);
    const std::vector<double> scores = {
        0.9, 0.05, 0.05, // correct
        0.2, 0.7,  0.1,  // correct
        0.5, 0.3,  0.2,  // wrong (predicts 0)
        0.4, 0.4,  0.2,  // tie 0/1 -> lowest index 0, correct
    };
    CHECK(classification_accuracy(scores, d) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("perfect and inverted scorers bracket AUC") {
    const auto d = labels_only({1, 0, 1, 0, 1}, 2);
    const std::vector<double> perfect = {0.1, 0.9, 0.8, 0.2, 0.3, 0.7, 0.9, 0.1, 0.6, 0.4};
    auto c = roc_and_auc(perfect, d, 1);
    CHECK(c.auc == doctest::Approx(1.0).epsilon(1e-12));
    c = roc_and_auc(perfect, d, 0);
    CHECK(c.auc == doctest::Approx(1.0).epsilon(1e-12)); // class-0 column is also perfect
    std::vector<double> inverted = perfect;
    for (std::size_t i = 0; i < inverted.size(); i += 2) std::swap(inverted[i], inverted[i + 1]);
    c = roc_and_auc(inverted, d, 1);
    CHECK(c.auc == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("constant scores give AUC one half") {
    const auto d = labels_only({0, 1, 0, 1, 1, 0}, 2);
    const std::vector<double> scores(12, 0.5);
    CHECK(roc_and_auc(scores, d, 1).auc == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("hand-checked AP") {
    // positives at ranks 1 and 3 of four: AP = 1*(1) -> recall .5 at P=1,
    // then recall 1 at P=2/3: AP = 0.5*1 + 0.5*(2/3) = 5/6
    const auto d = labels_only({1, 0, 1, 0}, 2);
    const std::vector<double> scores = {0.0, 0.9, 0.0, 0.7, 0.0, 0.6, 0.0, 0.2};
    CHECK(pr_and_ap(scores, d, 1).ap == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("AUC matches the pair-counting oracle on 50 fixtures") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const bool quantized = seed % 2 == 0;
        const std::size_t k = 2 + seed % 3;
        const auto fx = random_fixture(30 + seed % 40, k, seed * 31 + 7, quantized);
        for (std::size_t cls = 0; cls < k; ++cls) {
            const auto pos = positives(fx.data, cls);
            const auto n_pos = std::count(pos.begin(), pos.end(), true);
            if (n_pos == 0 || static_cast<std::size_t>(n_pos) == pos.size()) continue;
            const auto want = auc_by_pairs(column(fx.scores, k, cls), pos);
            const auto got = roc_and_auc(fx.scores, fx.data, cls).auc;
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("AP matches the threshold-enumeration oracle on 50 fixtures") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const bool quantized = seed % 2 == 1;
        const std::size_t k = 2 + seed % 3;
        const auto fx = random_fixture(25 + seed % 30, k, seed * 17 + 3, quantized);
        for (std::size_t cls = 0; cls < k; ++cls) {
            const auto pos = positives(fx.data, cls);
            if (std::count(pos.begin(), pos.end(), true) == 0) continue;
            const auto want = ap_by_thresholds(column(fx.scores, k, cls), pos);
            const auto got = pr_and_ap(fx.scores, fx.data, cls).ap;
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("roc curve endpoints and monotonicity") {
    const auto fx = random_fixture(60, 3, 12345, true);
    for (std::size_t cls = 0; cls < 3; ++cls) {
        const auto c = roc_and_auc(fx.scores, fx.data, cls);
        REQUIRE(c.roc.size() >= 2);
        CHECK(c.roc.front().x == 0.0);
        CHECK(c.roc.front().y == 0.0);
        CHECK(c.roc.back().x == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.roc.back().y == doctest::Approx(1.0).epsilon(1e-12));
        for (std::size_t i = 1; i < c.roc.size(); ++i) {
            CHECK(c.roc[i].x >= c.roc[i - 1].x);
            CHECK(c.roc[i].y >= c.roc[i - 1].y);
        }
    }
}

TEST_CASE("pr curve recall is non-decreasing and bounded") {
    const auto fx = random_fixture(60, 3, 999, true);
    for (std::size_t cls = 0; cls < 3; ++cls) {
        const auto c = pr_and_ap(fx.scores, fx.data, cls);
        REQUIRE(!c.pr.empty());
        for (std::size_t i = 0; i < c.pr.size(); ++i) {
            CHECK(c.pr[i].x >= (i ? c.pr[i - 1].x : 0.0));
            CHECK(c.pr[i].y >= 0.0);
            CHECK(c.pr[i].y <= 1.0);
        }
        CHECK(c.pr.back().x == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("macro report averages per-class values and skips absent classes") {
    // class 2 never appears; macro averages must use classes 0 and 1 only
    const auto d = labels_only({0, 1, 0, 1, 1, 0, 0, 1}, 3);
    const auto fx = random_fixture(8, 3, 4242, false);
    const auto rep = macro_report(fx.scores, d);
    const auto c0 = roc_and_auc(fx.scores, d, 0);
    const auto c1 = roc_and_auc(fx.scores, d, 1);
    const auto p0 = pr_and_ap(fx.scores, d, 0);
    const auto p1 = pr_and_ap(fx.scores, d, 1);
    CHECK(rep.auc == doctest::Approx(0.5 * (c0.auc + c1.auc)).epsilon(1e-12));
    CHECK(rep.ap == doctest::Approx(0.5 * (p0.ap + p1.ap)).epsilon(1e-12));
    CHECK(rep.ca == doctest::Approx(classification_accuracy(fx.scores, d)).epsilon(1e-12));
    CHECK(rep.per_class.size() == 3);
}

TEST_CASE("report json is parseable and carries the headline numbers") {
    const auto fx = random_fixture(20, 2, 77, false);
    const auto rep = macro_report(fx.scores, fx.data);
    const auto text = rep.to_json();
    CHECK(text.find("\"auc\"") != std::string::npos);
    CHECK(text.find("\"ap\"") != std::string::npos);
    CHECK(text.find("\"ca\"") != std::string::npos);
    CHECK(text.find("macro-ovr") != std::string::npos);
}

TEST_CASE("degenerate inputs are rejected") {
    LabeledDataset empty;
    CHECK_THROWS(macro_report({}, empty));
    const auto d = labels_only({0, 0}, 2);
    CHECK_THROWS(classification_accuracy({0.1, 0.2}, d)); // wrong score length
}
