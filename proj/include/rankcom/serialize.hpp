#pragma once

#include <string>
#include <vector>

#include "rankcom/em.hpp"
#include "rankcom/evaluation.hpp"
#include "rankcom/generative.hpp"

namespace rankcom {

/// Fixed "%.17g" formatting so outputs round-trip and identical runs produce
/// byte-identical files.
std::string format_double(double v);

void write_matrix_csv(const std::string& path, const Mat& m,
                      const std::vector<std::string>* row_labels = nullptr);
Mat read_matrix_csv(const std::string& path);

/// FitResult directory: theta.json (c, delta0, mu, beta, K plus run
/// metadata), u.csv, v.csv, w.csv, scores.csv (label, s, Q, sigma_hat),
/// elbo_trace.csv.
void save_fit(const std::string& dir, const FitResult& fit,
              const std::vector<std::string>& labels, double decision_threshold = 0.5);
Model load_fit(const std::string& dir);

/// Ground truth directory: ground_truth.json (sigma, s, c, delta0, mu, beta)
/// plus u.csv, v.csv, w.csv.
void save_ground_truth(const std::string& dir, const GroundTruth& gt);
GroundTruth load_ground_truth(const std::string& dir);

void save_cv_report_json(const std::string& path, const CVReport& report);
void save_cv_report_csv(const std::string& path, const CVReport& report);

void save_sweep_csv(const std::string& path, const SweepTable& table);
/// Aggregates per (mu_gt, model): mean and standard deviation of every
/// metric pooled over samples and folds.
void save_sweep_summary_json(const std::string& path, const SweepTable& table);

}  // namespace rankcom
