#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogniscope {

struct Kernel {
  enum class Kind { linear, gaussian };
  Kind kind = Kind::linear;
  double gamma = 1.0;  // gaussian only: exp(-gamma |a - b|^2)

  double operator()(const std::vector<double>& a, const std::vector<double>& b) const;
};

struct SvmConfig {
  double c = 1.0;           // soft-margin regularization
  double tolerance = 1e-3;  // maximal KKT violation at convergence
  std::size_t max_iterations = 10'000'000;
  /// Divide every coordinate by the global mean of the training features.
  bool normalize = true;
  /// Gaussian width; default 1 / (dim * variance of the normalized features).
  std::optional<double> gamma;
};

/// Raised when SMO hits the iteration cap before reaching the tolerance.
class TrainingFailure : public std::runtime_error {
 public:
  TrainingFailure(double gap, std::size_t iterations);
  double residual_gap() const { return gap_; }
  std::size_t iterations() const { return iterations_; }

 private:
  double gap_;
  std::size_t iterations_;
};

/// One-vs-one machine for classes (positive, negative); decision >= 0 votes positive.
struct BinaryMachine {
  int positive_class = 0;  // the lower class id
  int negative_class = 1;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coefficients;  // alpha_i * y_i
  double bias = 0.0;
  double final_gap = 0.0;
  std::size_t iterations = 0;
  std::size_t bounded_support_vectors = 0;

  double decision(const std::vector<double>& x, const Kernel& kernel) const;
};

struct MarginClassifier {
  std::size_t dim = 0;
  Kernel kernel;
  double normalizer = 1.0;  // features are divided by this before the kernel
  std::vector<int> classes;  // ascending
  std::vector<BinaryMachine> machines;

  /// Primal weights of a linear machine (normalized feature space).
  std::vector<double> linear_weights(std::size_t machine) const;
  /// Geometric margin 1/|w| of a linear machine.
  double linear_margin(std::size_t machine) const;
  std::size_t support_vector_count() const;
};

struct LabeledVector {
  std::vector<double> features;
  int label = 0;
};

/// Soft-margin SVM by SMO with second-order working-set selection; one-vs-one for
/// more than two classes. Throws std::invalid_argument on fewer than two classes,
/// fewer than two examples of a class, or ragged features.
MarginClassifier train_margin_classifier(const std::vector<LabeledVector>& data,
                                         Kernel::Kind kernel, const SvmConfig& config);

/// One-vs-one vote; ties go to the lowest class id.
int classify_features(const MarginClassifier& clf, const std::vector<double>& features);

/// Flat text model format (see README).
void save_classifier(const MarginClassifier& clf, std::ostream& out);
MarginClassifier load_classifier(std::istream& in);

}  // namespace cogniscope
