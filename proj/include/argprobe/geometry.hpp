#pragma once

#include <string>
#include <utility>
#include <vector>

#include "argprobe/backend.hpp"
#include "argprobe/paradigm.hpp"

namespace argprobe::geometry {

// Rows of the pre-contextual embedding layer, indexed by token id. Once
// corrected, the matrix remembers the directions that were removed so a
// repeated correction with the same d is a no-op.
struct EmbeddingMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> removed_directions;
  int correction_d = 0;  // 0 while uncorrected
  int dim() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
};

EmbeddingMatrix embedding_matrix(const backend::ModelHandle& handle);

// Mean-centers the rows and removes the top-d principal directions.
// Idempotent: a matrix already corrected with the same d is returned as-is.
EmbeddingMatrix all_but_the_top(const EmbeddingMatrix& E, int d = 3);

struct NounGroup {
  std::string label;
  std::vector<int> members;  // token ids
};

struct SimilarityEntry {
  int token = -1;
  double similarity = 0.0;
  bool defined = true;  // false for zero-norm rows (excluded from the mean)
};

struct GroupProfile {
  std::string group;
  int novel = -1;
  std::vector<SimilarityEntry> members;
  double mean = 0.0;
  double std_error = 0.0;  // sample stddev / sqrt(n) over defined members
  int defined_count = 0;
};

// Cosine similarity of every group member to each novel token.
std::vector<GroupProfile> cosine_profile(const EmbeddingMatrix& E,
                                         const std::vector<int>& novel_tokens,
                                         const std::vector<NounGroup>& groups);

struct CorrelationReport {
  std::vector<std::pair<double, double>> points;  // (baseline, tuned) log-probs
  double r = 0.0;
  double p_value = 1.0;
  int n = 0;
};

// Sample Pearson correlation; throws below 3 points or at zero variance.
double pearson_r(const std::vector<double>& x, const std::vector<double>& y);
// Two-sided p-value from the t distribution with n-2 degrees of freedom.
double correlation_p_value(double r, int n);

// Pairs baseline log p(group member at mask) with tuned log p(novel token of
// that group at mask) over every mask position of the probe set.
CorrelationReport baseline_correlation_probe(
    const backend::ModelHandle& tuned, const backend::ModelHandle& baseline,
    const paradigm::GeneratedDataset& probe,
    const std::vector<std::pair<NounGroup, int>>& group_novel);

struct DriftAudit {
  std::vector<double> values;  // one D_KL per (sentence, position)
  double mean = 0.0;
  double q25 = 0.0, q50 = 0.0, q75 = 0.0;
  std::vector<std::string> sample;  // the audited sentences
};

// D_KL(tuned || baseline) per token position, support restricted to the
// shared base vocabulary (novel ids dropped, renormalized).
DriftAudit kl_audit(const backend::ModelHandle& tuned,
                    const backend::ModelHandle& baseline,
                    const std::vector<std::string>& sample);

// --- plot / table emission --------------------------------------------------

void write_profile_table(const std::vector<GroupProfile>& profiles,
                         const std::string& path);
void write_scatter_svg(const CorrelationReport& report,
                       const std::string& path);
void write_strip_svg(
    const std::vector<std::pair<std::string, std::vector<double>>>& series,
    const std::string& path);

}  // namespace argprobe::geometry
