#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace trustconv {

enum class Weighting { Uniform, InverseDistance };

std::string_view to_string(Weighting weighting);
std::optional<Weighting> parse_weighting(std::string_view text);

/// Sparse symmetric co-occurrence counts X_ij over a fixed vocabulary.
class CooccurrenceMatrix {
 public:
  using Cell = std::pair<std::size_t, std::size_t>;

  CooccurrenceMatrix(std::vector<std::string> vocab, int window, Weighting weighting);

  const std::vector<std::string>& vocab() const { return vocab_; }
  std::size_t size() const { return vocab_.size(); }
  int window() const { return window_; }
  Weighting weighting() const { return weighting_; }

  std::optional<std::size_t> index_of(std::string_view word) const;
  double at(std::size_t i, std::size_t j) const;
  double at(std::string_view a, std::string_view b) const;
  const std::map<Cell, double>& cells() const { return cells_; }
  bool empty() const { return cells_.empty(); }

  /// Adds x to X_ij and X_ji (twice to X_ii).
  void add_symmetric(std::size_t i, std::size_t j, double x);
  /// Sets X_ij = X_ji = x; a zero removes the cell.
  void set_symmetric(std::size_t i, std::size_t j, double x);

 private:
  void check(std::size_t i, std::size_t j) const;

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  int window_;
  Weighting weighting_;
  std::map<Cell, double> cells_;
};

/// Counts pairs up to `window` positions apart inside each stream. Windows
/// never cross stream boundaries. Vocabulary is sorted lexicographically.
CooccurrenceMatrix build_cooccurrence(const std::vector<std::vector<std::string>>& streams, int window,
                                      Weighting weighting);

/// `i j x` triplets, one stored cell per line.
void write_cooccurrence(const CooccurrenceMatrix& matrix, std::ostream& out);

struct GloveConfig {
  std::size_t dim = 50;
  double x_max = 100.0;
  double alpha = 0.75;
  double learning_rate = 0.05;
  int epochs = 50;
  std::uint64_t seed = 42;
  // >1 trains shards in parallel and averages their updates once per epoch.
  // Deterministic for a fixed thread count but not equal to sequential mode.
  std::size_t threads = 1;
};

/// Model parameters; matrices are row-major |V| x dim.
struct GloveParams {
  std::size_t vocab_size = 0;
  std::size_t dim = 0;
  std::vector<double> main;
  std::vector<double> context;
  std::vector<double> main_bias;
  std::vector<double> context_bias;

  static GloveParams zeros(std::size_t vocab_size, std::size_t dim);
  /// Uniform in [-0.5/dim, 0.5/dim] from a 64-bit Mersenne twister.
  static GloveParams random(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

  double* main_row(std::size_t i) { return main.data() + i * dim; }
  double* context_row(std::size_t i) { return context.data() + i * dim; }
  const double* main_row(std::size_t i) const { return main.data() + i * dim; }
  const double* context_row(std::size_t i) const { return context.data() + i * dim; }
};

/// min(1, (x / x_max)^alpha); zero at x = 0.
double glove_weight(double x, double x_max, double alpha);

struct CostAndGradient {
  double cost = 0.0;
  GloveParams gradient;
};

/// J = sum_ij f(X_ij) (w_i . w~_j + b_i + b~_j - ln X_ij)^2 and its exact gradient.
CostAndGradient glove_cost_and_grad(const GloveParams& params, const CooccurrenceMatrix& matrix, double x_max,
                                    double alpha);
double glove_cost(const GloveParams& params, const CooccurrenceMatrix& matrix, double x_max, double alpha);

class EmbeddingTable;

/// AdaGrad over shuffled cells. The embedding of word i is w_i + w~_i.
/// `cost_history`, when given, receives the cost before training and after
/// every epoch. Throws DivergenceDetected if the cost stops being finite.
EmbeddingTable train_glove(const CooccurrenceMatrix& matrix, const GloveConfig& config,
                           std::vector<double>* cost_history = nullptr);

/// Immutable-after-build map word -> dense vector of fixed dimension.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  bool normalized() const { return normalized_; }
  const std::vector<std::string>& words() const { return words_; }

  bool contains(std::string_view word) const;
  /// Throws UnknownWord.
  std::span<const double> vector(std::string_view word) const;

  /// Returns true when an existing entry was replaced.
  bool insert_or_assign(const std::string& word, std::span<const double> values);

  /// Copy with every non-zero vector scaled to unit length.
  EmbeddingTable normalized_copy() const;

 private:
  std::size_t dim_ = 0;
  bool normalized_ = false;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

/// Text format: `word v1 ... vd` per line. Duplicate words: last row wins and
/// a warning is appended. Throws InconsistentDimensions or MalformedRow.
EmbeddingTable parse_vectors(std::istream& in, std::vector<std::string>* warnings = nullptr);
EmbeddingTable load_vectors(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
void write_vectors(const EmbeddingTable& table, std::ostream& out);

/// Throws ZeroVector or DimensionMismatch. Result clamped to [-1, 1].
double cosine_similarity(std::span<const double> u, std::span<const double> v);

}  // namespace trustconv
