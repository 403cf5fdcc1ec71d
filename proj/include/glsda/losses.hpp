#pragma once

#include <span>
#include <vector>

#include "glsda/matrix.hpp"

namespace glsda {

// Loss value plus gradient with respect to a matrix-shaped input.
struct MatrixLossGrad {
  double value{0.0};
  Matrix grad;
};

// Loss value plus gradient with respect to a vector-shaped input.
struct VectorLossGrad {
  double value{0.0};
  std::vector<double> grad;
};

// Contrastive semantic distillation: per sample, cross-entropy of the
// temperature-scaled cosine similarities against the matched teacher row,
// with all in-batch teacher rows in the denominator. Batch mean. Gradients
// flow to the student embeddings only.
MatrixLossGrad lsdm_loss(const Matrix& z_csi, const Matrix& z_lm, double tau);

// Squared distance between batch means. Gradient per student row is
// 2 * (mean difference) / B.
MatrixLossGrad feat_loss(const Matrix& z_csi, const Matrix& z_lm);

// Mean squared distance between neighboring segment embeddings.
MatrixLossGrad temp_loss(const Matrix& segments);

// KL(softmax(student/tau) || softmax(teacher/tau)), natural log. Gradient
// flows to the student logits only; no tau^2 rescaling.
VectorLossGrad cls_loss(std::span<const double> student_logits,
                        std::span<const double> teacher_logits, double tau);

// Supervised cross-entropy, max-subtraction stabilized.
VectorLossGrad ce_loss(std::span<const double> logits, std::size_t true_class);

struct LossReport {
  double lsdm{0.0}, feat{0.0}, temp{0.0}, cls{0.0}, ce{0.0};
  double lambda1{1.0}, lambda2{1.0}, lambda3{1.0}, lambda_ce{1.0};
  double total{0.0};
};

LossReport combine(double lsdm, double feat, double temp, double cls, double ce,
                   double lambda1, double lambda2, double lambda3,
                   double lambda_ce);

}  // namespace glsda
