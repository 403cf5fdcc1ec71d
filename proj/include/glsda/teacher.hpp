#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace glsda {

// Frozen per-class semantic anchors. Embeddings are unit L2 norm after load
// and pairwise distinguishable (cosine < 0.95).
struct TeacherBank {
  std::size_t dim{0};
  std::vector<std::vector<double>> embeddings;  // index == class id
  std::vector<std::string> prompts;             // optional, documentation only

  std::size_t num_classes() const { return embeddings.size(); }
  void validate() const;
};

// Text format: line 1 "C d", then C lines "class_id v_1 ... v_d".
// Lines starting with '#' are comments.
TeacherBank load_teacher_bank(std::istream& in);
TeacherBank load_teacher_bank(const std::filesystem::path& source);
void write_teacher_bank(const TeacherBank& bank, std::ostream& out);
void write_teacher_bank(const TeacherBank& bank, const std::filesystem::path& dest);

// Seeded Gaussian anchors, re-orthogonalized until every pairwise |cos|
// is within the bound. Requires dim >= classes.
TeacherBank synth_teacher_bank(std::size_t classes, std::size_t dim,
                               std::uint64_t seed, double max_pairwise_cos = 0.3);

// Scaled cosine similarities to the class anchors; entry `cls` is exactly
// `scale` (self-similarity 1).
std::vector<double> teacher_logits(const TeacherBank& bank, std::size_t cls,
                                   double scale);

}  // namespace glsda
