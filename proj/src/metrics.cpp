#include "nnn/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace nnn {

namespace {

void check_scores(const std::vector<double>& scores, const LabeledDataset& data) {
    if (data.n_rows == 0) throw std::invalid_argument("metrics need at least one datum");
    if (scores.size() != data.n_rows * data.n_classes)
        throw std::invalid_argument("score matrix does not match dataset shape");
}

// (score, is_positive) pairs for class `cls`, sorted by descending score.
std::vector<std::pair<double, bool>> ranked(const std::vector<double>& scores,
                                            const LabeledDataset& data, std::size_t cls) {
    std::vector<std::pair<double, bool>> r(data.n_rows);
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        r[i] = {scores[i * data.n_classes + cls], data.label_index(i) == cls};
    }
    std::stable_sort(r.begin(), r.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    return r;
}

} // namespace

double classification_accuracy(const std::vector<double>& scores, const LabeledDataset& data) {
    check_scores(scores, data);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.n_rows; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < data.n_classes; ++c) {
            if (scores[i * data.n_classes + c] > scores[i * data.n_classes + best]) best = c;
        }
        if (best == data.label_index(i)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.n_rows);
}

ClassCurves roc_and_auc(const std::vector<double>& scores, const LabeledDataset& data,
                        std::size_t cls) {
    check_scores(scores, data);
    const auto r = ranked(scores, data, cls);
    std::size_t n_pos = 0;
    for (const auto& [s, p] : r) n_pos += p;
    const std::size_t n_neg = r.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("ROC needs at least one positive and one negative");

    ClassCurves out;
    out.roc.push_back({r.front().first, 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < r.size()) {
        // advance over a tie group so ties earn half credit via the trapezoid
        const double t = r[i].first;
        while (i < r.size() && r[i].first == t) {
            if (r[i].second) ++tp;
            else ++fp;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
        out.auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        out.roc.push_back({t, fpr, tpr});
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    return out;
}

ClassCurves pr_and_ap(const std::vector<double>& scores, const LabeledDataset& data,
                      std::size_t cls) {
    check_scores(scores, data);
    const auto r = ranked(scores, data, cls);
    std::size_t n_pos = 0;
    for (const auto& [s, p] : r) n_pos += p;
    if (n_pos == 0) throw std::invalid_argument("PR needs at least one positive");

    ClassCurves out;
    std::size_t tp = 0, fp = 0;
    double prev_recall = 0.0;
    std::size_t i = 0;
    while (i < r.size()) {
        const double t = r[i].first;
        while (i < r.size() && r[i].first == t) {
            if (r[i].second) ++tp;
            else ++fp;
            ++i;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        out.ap += (recall - prev_recall) * precision;
        out.pr.push_back({t, recall, precision});
        prev_recall = recall;
    }
    return out;
}

EvalReport macro_report(const std::vector<double>& scores, const LabeledDataset& data) {
    check_scores(scores, data);
    EvalReport rep;
    rep.ca = classification_accuracy(scores, data);
    std::size_t counted = 0;
    rep.per_class.resize(data.n_classes);
    for (std::size_t c = 0; c < data.n_classes; ++c) {
        bool present = false;
        for (std::size_t i = 0; i < data.n_rows && !present; ++i) present = data.label_index(i) == c;
        if (!present) continue;
        ClassCurves roc = roc_and_auc(scores, data, c);
        ClassCurves pr = pr_and_ap(scores, data, c);
        rep.per_class[c].roc = std::move(roc.roc);
        rep.per_class[c].auc = roc.auc;
        rep.per_class[c].pr = std::move(pr.pr);
        rep.per_class[c].ap = pr.ap;
        rep.auc += roc.auc;
        rep.ap += pr.ap;
        ++counted;
    }
    if (counted == 0) throw std::invalid_argument("no class present in labels");
    rep.auc /= static_cast<double>(counted);
    rep.ap /= static_cast<double>(counted);
    return rep;
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["auc"] = auc;
    j["ap"] = ap;
    j["ca"] = ca;
    j["averaging"] = averaging;
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : per_class) {
        nlohmann::json jc;
        jc["auc"] = c.auc;
        jc["ap"] = c.ap;
        classes.push_back(jc);
    }
    j["per_class"] = classes;
    return j.dump(2);
}

void EvalReport::save_json(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write report json: " + path);
    f << to_json() << '\n';
}

void EvalReport::export_curves_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write curves csv: " + path);
    f.precision(17);
    f << "class,kind,threshold,x,y\n";
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        for (const CurvePoint& p : per_class[c].roc)
            f << c << ",roc," << p.threshold << ',' << p.x << ',' << p.y << '\n';
        for (const CurvePoint& p : per_class[c].pr)
            f << c << ",pr," << p.threshold << ',' << p.x << ',' << p.y << '\n';
    }
}

} // namespace nnn
