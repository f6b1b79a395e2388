#pragma once

#include <string>
#include <vector>

#include "nnn/dataset.hpp"

namespace nnn {

struct CurvePoint {
    double threshold = 0.0;
    double x = 0.0; // fpr (ROC) or recall (PR)
    double y = 0.0; // tpr (ROC) or precision (PR)
};

struct ClassCurves {
    std::vector<CurvePoint> roc;
    std::vector<CurvePoint> pr;
    double auc = 0.0;
    double ap = 0.0;
};

struct EvalReport {
    double auc = 0.0; // macro one-vs-rest
    double ap = 0.0;  // macro one-vs-rest
    double ca = 0.0;  // global accuracy
    std::vector<ClassCurves> per_class;
    std::string averaging = "macro-ovr";

    std::string to_json() const;
    void save_json(const std::string& path) const;
    /// CSV columns: class, kind (roc|pr), threshold, x, y.
    void export_curves_csv(const std::string& path) const;
};

/// scores: n_rows x n_classes, row-major. Argmax ties break toward the
/// lowest class index.
double classification_accuracy(const std::vector<double>& scores, const LabeledDataset& data);

/// One-vs-rest sweep over the class-i score; AUC by the trapezoid rule
/// (equal to the Mann-Whitney statistic with half credit for ties).
ClassCurves roc_and_auc(const std::vector<double>& scores, const LabeledDataset& data,
                        std::size_t cls);

/// One-vs-rest PR sweep; AP as the step integral sum (R_k - R_{k-1}) P_k.
ClassCurves pr_and_ap(const std::vector<double>& scores, const LabeledDataset& data,
                      std::size_t cls);

/// Per-class one-vs-rest metrics averaged uniformly over the classes present
/// in the labels; CA computed globally.
EvalReport macro_report(const std::vector<double>& scores, const LabeledDataset& data);

} // namespace nnn
