#include "trustconv/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "trustconv/error.hpp"

namespace trustconv {

std::string_view to_string(Weighting weighting) {
  return weighting == Weighting::Uniform ? "uniform" : "inverse-distance";
}

std::optional<Weighting> parse_weighting(std::string_view text) {
  if (text == "uniform") return Weighting::Uniform;
  if (text == "inverse-distance") return Weighting::InverseDistance;
  return std::nullopt;
}

CooccurrenceMatrix::CooccurrenceMatrix(std::vector<std::string> vocab, int window, Weighting weighting)
    : vocab_(std::move(vocab)), window_(window), weighting_(weighting) {
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], i).second) {
      throw Error(ErrorCode::DuplicateId, "vocabulary word '" + vocab_[i] + "' repeated");
    }
  }
}

std::optional<std::size_t> CooccurrenceMatrix::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void CooccurrenceMatrix::check(std::size_t i, std::size_t j) const {
  if (i >= vocab_.size() || j >= vocab_.size()) {
    throw Error(ErrorCode::InvalidArgument, "co-occurrence index out of range");
  }
}

double CooccurrenceMatrix::at(std::size_t i, std::size_t j) const {
  check(i, j);
  auto it = cells_.find({i, j});
  return it == cells_.end() ? 0.0 : it->second;
}

double CooccurrenceMatrix::at(std::string_view a, std::string_view b) const {
  auto i = index_of(a);
  auto j = index_of(b);
  if (!i || !j) return 0.0;
  return at(*i, *j);
}

void CooccurrenceMatrix::add_symmetric(std::size_t i, std::size_t j, double x) {
  check(i, j);
  cells_[{i, j}] += x;
  cells_[{j, i}] += x;
}

void CooccurrenceMatrix::set_symmetric(std::size_t i, std::size_t j, double x) {
  check(i, j);
  if (x == 0.0) {
    cells_.erase({i, j});
    cells_.erase({j, i});
  } else {
    cells_[{i, j}] = x;
    cells_[{j, i}] = x;
  }
}

CooccurrenceMatrix build_cooccurrence(const std::vector<std::vector<std::string>>& streams, int window,
                                      Weighting weighting) {
  if (window < 1) throw Error(ErrorCode::InvalidArgument, "window must be at least 1");
  std::set<std::string> words;
  for (const auto& stream : streams) words.insert(stream.begin(), stream.end());
  if (words.empty()) throw Error(ErrorCode::EmptyInput, "no tokens to count");

  CooccurrenceMatrix matrix({words.begin(), words.end()}, window, weighting);
  for (const auto& stream : streams) {
    std::vector<std::size_t> ids;
    ids.reserve(stream.size());
    for (const std::string& word : stream) ids.push_back(*matrix.index_of(word));
    for (std::size_t pos = 0; pos < ids.size(); ++pos) {
      std::size_t first = pos > static_cast<std::size_t>(window) ? pos - static_cast<std::size_t>(window) : 0;
      for (std::size_t ctx = first; ctx < pos; ++ctx) {
        double distance = static_cast<double>(pos - ctx);
        double increment = weighting == Weighting::Uniform ? 1.0 : 1.0 / distance;
        matrix.add_symmetric(ids[pos], ids[ctx], increment);
      }
    }
  }
  return matrix;
}

void write_cooccurrence(const CooccurrenceMatrix& matrix, std::ostream& out) {
  char buffer[64];
  for (const auto& [cell, x] : matrix.cells()) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", x);
    out << cell.first << ' ' << cell.second << ' ' << buffer << '\n';
  }
}

GloveParams GloveParams::zeros(std::size_t vocab_size, std::size_t dim) {
  GloveParams p;
  p.vocab_size = vocab_size;
  p.dim = dim;
  p.main.assign(vocab_size * dim, 0.0);
  p.context.assign(vocab_size * dim, 0.0);
  p.main_bias.assign(vocab_size, 0.0);
  p.context_bias.assign(vocab_size, 0.0);
  return p;
}

namespace {

// 53-bit uniform double in [0, 1), independent of the standard library's
// distribution implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

GloveParams GloveParams::random(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be at least 1");
  GloveParams p = zeros(vocab_size, dim);
  std::mt19937_64 rng(seed);
  double scale = 1.0 / static_cast<double>(dim);
  for (auto* values : {&p.main, &p.context, &p.main_bias, &p.context_bias}) {
    for (double& v : *values) v = (unit_uniform(rng) - 0.5) * scale;
  }
  return p;
}

double glove_weight(double x, double x_max, double alpha) {
  if (x >= x_max) return 1.0;
  if (x <= 0.0) return 0.0;
  return std::pow(x / x_max, alpha);
}

namespace {

void check_compatible(const GloveParams& params, const CooccurrenceMatrix& matrix) {
  if (params.vocab_size != matrix.size()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vocabulary differs from matrix vocabulary");
  }
}

double residual(const GloveParams& p, std::size_t i, std::size_t j, double x) {
  const double* w = p.main_row(i);
  const double* wc = p.context_row(j);
  double dot = 0.0;
  for (std::size_t k = 0; k < p.dim; ++k) dot += w[k] * wc[k];
  return dot + p.main_bias[i] + p.context_bias[j] - std::log(x);
}

void require_positive(double x, std::size_t i, std::size_t j) {
  if (!(x > 0.0)) {
    throw Error(ErrorCode::NonPositiveCell,
                "X(" + std::to_string(i) + "," + std::to_string(j) + ") must be positive");
  }
}

}  // namespace

double glove_cost(const GloveParams& params, const CooccurrenceMatrix& matrix, double x_max, double alpha) {
  check_compatible(params, matrix);
  double cost = 0.0;
  for (const auto& [cell, x] : matrix.cells()) {
    require_positive(x, cell.first, cell.second);
    double r = residual(params, cell.first, cell.second, x);
    cost += glove_weight(x, x_max, alpha) * r * r;
  }
  return cost;
}

CostAndGradient glove_cost_and_grad(const GloveParams& params, const CooccurrenceMatrix& matrix, double x_max,
                                    double alpha) {
  check_compatible(params, matrix);
  CostAndGradient out;
  out.gradient = GloveParams::zeros(params.vocab_size, params.dim);
  GloveParams& g = out.gradient;
  for (const auto& [cell, x] : matrix.cells()) {
    auto [i, j] = cell;
    require_positive(x, i, j);
    double f = glove_weight(x, x_max, alpha);
    double r = residual(params, i, j, x);
    out.cost += f * r * r;
    double scale = 2.0 * f * r;
    const double* w = params.main_row(i);
    const double* wc = params.context_row(j);
    double* gw = g.main_row(i);
    double* gwc = g.context_row(j);
    for (std::size_t k = 0; k < params.dim; ++k) {
      gw[k] += scale * wc[k];
      gwc[k] += scale * w[k];
    }
    g.main_bias[i] += scale;
    g.context_bias[j] += scale;
  }
  return out;
}

namespace {

struct Entry {
  std::size_t i;
  std::size_t j;
  double log_x;
  double weight;
};

// AdaGrad state: parameters plus accumulated squared gradients.
struct TrainingState {
  GloveParams params;
  GloveParams grad_sq;
};

// One pass over entries[begin, end). Uses the per-cell gradient of J/2.
void sgd_pass(TrainingState& state, const std::vector<Entry>& entries, std::size_t begin, std::size_t end,
              double learning_rate) {
  GloveParams& p = state.params;
  GloveParams& gsq = state.grad_sq;
  const std::size_t dim = p.dim;
  for (std::size_t e = begin; e < end; ++e) {
    const Entry& entry = entries[e];
    double* w = p.main_row(entry.i);
    double* wc = p.context_row(entry.j);
    double* gw = gsq.main_row(entry.i);
    double* gwc = gsq.context_row(entry.j);
    double dot = 0.0;
    for (std::size_t k = 0; k < dim; ++k) dot += w[k] * wc[k];
    double diff = dot + p.main_bias[entry.i] + p.context_bias[entry.j] - entry.log_x;
    double fdiff = entry.weight * diff;
    for (std::size_t k = 0; k < dim; ++k) {
      double g_main = fdiff * wc[k];
      double g_ctx = fdiff * w[k];
      w[k] -= learning_rate * g_main / std::sqrt(gw[k]);
      wc[k] -= learning_rate * g_ctx / std::sqrt(gwc[k]);
      gw[k] += g_main * g_main;
      gwc[k] += g_ctx * g_ctx;
    }
    p.main_bias[entry.i] -= learning_rate * fdiff / std::sqrt(gsq.main_bias[entry.i]);
    p.context_bias[entry.j] -= learning_rate * fdiff / std::sqrt(gsq.context_bias[entry.j]);
    gsq.main_bias[entry.i] += fdiff * fdiff;
    gsq.context_bias[entry.j] += fdiff * fdiff;
  }
}

void add_scaled_delta(std::vector<double>& target, const std::vector<double>& base, const std::vector<double>& shard,
                      double scale) {
  for (std::size_t k = 0; k < target.size(); ++k) target[k] += scale * (shard[k] - base[k]);
}

void parallel_epoch(TrainingState& state, const std::vector<Entry>& entries, const GloveConfig& config) {
  std::size_t shards = std::min(config.threads, entries.size());
  std::vector<TrainingState> local(shards, state);
  std::vector<std::thread> workers;
  workers.reserve(shards);
  for (std::size_t s = 0; s < shards; ++s) {
    std::size_t begin = entries.size() * s / shards;
    std::size_t end = entries.size() * (s + 1) / shards;
    workers.emplace_back([&, s, begin, end] { sgd_pass(local[s], entries, begin, end, config.learning_rate); });
  }
  for (auto& worker : workers) worker.join();

  // Merge barrier: average the shard updates.
  TrainingState merged = state;
  double scale = 1.0 / static_cast<double>(shards);
  for (const TrainingState& shard : local) {
    add_scaled_delta(merged.params.main, state.params.main, shard.params.main, scale);
    add_scaled_delta(merged.params.context, state.params.context, shard.params.context, scale);
    add_scaled_delta(merged.params.main_bias, state.params.main_bias, shard.params.main_bias, scale);
    add_scaled_delta(merged.params.context_bias, state.params.context_bias, shard.params.context_bias, scale);
    add_scaled_delta(merged.grad_sq.main, state.grad_sq.main, shard.grad_sq.main, scale);
    add_scaled_delta(merged.grad_sq.context, state.grad_sq.context, shard.grad_sq.context, scale);
    add_scaled_delta(merged.grad_sq.main_bias, state.grad_sq.main_bias, shard.grad_sq.main_bias, scale);
    add_scaled_delta(merged.grad_sq.context_bias, state.grad_sq.context_bias, shard.grad_sq.context_bias, scale);
  }
  state = std::move(merged);
}

}  // namespace

EmbeddingTable train_glove(const CooccurrenceMatrix& matrix, const GloveConfig& config,
                           std::vector<double>* cost_history) {
  if (config.epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be at least 1");
  if (config.dim < 1) throw Error(ErrorCode::InvalidArgument, "dim must be at least 1");
  if (!(config.x_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "x_max must be positive");
  if (!(config.alpha > 0.0 && config.alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
  if (!(config.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  if (matrix.empty()) throw Error(ErrorCode::EmptyInput, "co-occurrence matrix has no cells");

  std::vector<Entry> entries;
  entries.reserve(matrix.cells().size());
  for (const auto& [cell, x] : matrix.cells()) {
    require_positive(x, cell.first, cell.second);
    entries.push_back({cell.first, cell.second, std::log(x), glove_weight(x, config.x_max, config.alpha)});
  }

  TrainingState state{GloveParams::random(matrix.size(), config.dim, config.seed),
                      GloveParams::zeros(matrix.size(), config.dim)};
  for (auto* values : {&state.grad_sq.main, &state.grad_sq.context, &state.grad_sq.main_bias,
                       &state.grad_sq.context_bias}) {
    std::fill(values->begin(), values->end(), 1.0);
  }

  auto record_cost = [&](int epoch) {
    double cost = glove_cost(state.params, matrix, config.x_max, config.alpha);
    if (!std::isfinite(cost)) {
      throw Error(ErrorCode::DivergenceDetected, "cost became non-finite at epoch " + std::to_string(epoch));
    }
    if (cost_history) cost_history->push_back(cost);
  };
  if (cost_history) cost_history->clear();
  record_cost(0);

  // Shuffle stream is seeded separately from initialisation.
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t k = entries.size(); k > 1; --k) {
      std::size_t pick = static_cast<std::size_t>(shuffle_rng() % k);
      std::swap(entries[k - 1], entries[pick]);
    }
    if (config.threads > 1) {
      parallel_epoch(state, entries, config);
    } else {
      sgd_pass(state, entries, 0, entries.size(), config.learning_rate);
    }
    record_cost(epoch);
  }

  EmbeddingTable table(config.dim);
  std::vector<double> combined(config.dim);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    const double* w = state.params.main_row(i);
    const double* wc = state.params.context_row(i);
    for (std::size_t k = 0; k < config.dim; ++k) combined[k] = w[k] + wc[k];
    table.insert_or_assign(matrix.vocab()[i], combined);
  }
  return table;
}

bool EmbeddingTable::contains(std::string_view word) const { return index_.contains(std::string(word)); }

std::span<const double> EmbeddingTable::vector(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) throw Error(ErrorCode::UnknownWord, "'" + std::string(word) + "' has no embedding");
  return {data_.data() + it->second * dim_, dim_};
}

bool EmbeddingTable::insert_or_assign(const std::string& word, std::span<const double> values) {
  if (dim_ == 0 && words_.empty()) dim_ = values.size();
  if (values.size() != dim_) {
    throw Error(ErrorCode::InconsistentDimensions, "'" + word + "' has " + std::to_string(values.size()) +
                                                       " components, expected " + std::to_string(dim_));
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::MalformedRow, "'" + word + "' has a non-finite component");
  }
  auto it = index_.find(word);
  if (it != index_.end()) {
    std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
    return true;
  }
  index_.emplace(word, words_.size());
  words_.push_back(word);
  data_.insert(data_.end(), values.begin(), values.end());
  return false;
}

EmbeddingTable EmbeddingTable::normalized_copy() const {
  EmbeddingTable out = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    double* row = out.data_.data() + i * dim_;
    double norm = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) norm += row[k] * row[k];
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (std::size_t k = 0; k < dim_; ++k) row[k] /= norm;
    }
  }
  out.normalized_ = true;
  return out;
}

EmbeddingTable parse_vectors(std::istream& in, std::vector<std::string>* warnings) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    values.clear();
    std::string field;
    while (fields >> field) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": '" + field + "' is not a number");
      }
      values.push_back(v);
    }
    if (values.empty()) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": no vector components");
    }
    if (!table.empty() && values.size() != table.dim()) {
      throw Error(ErrorCode::InconsistentDimensions, "line " + std::to_string(line_no) + ": " +
                                                         std::to_string(values.size()) + " components, expected " +
                                                         std::to_string(table.dim()));
    }
    if (table.empty()) table = EmbeddingTable(values.size());
    if (table.insert_or_assign(word, values) && warnings) {
      warnings->push_back("line " + std::to_string(line_no) + ": duplicate word '" + word + "' replaces earlier row");
    }
  }
  return table;
}

EmbeddingTable load_vectors(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read vectors " + path.string());
  return parse_vectors(in, warnings);
}

void write_vectors(const EmbeddingTable& table, std::ostream& out) {
  char buffer[64];
  for (const std::string& word : table.words()) {
    out << word;
    for (double v : table.vector(word)) {
      std::snprintf(buffer, sizeof(buffer), " %.17g", v);
      out << buffer;
    }
    out << '\n';
  }
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "vectors of length " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    nu += u[k] * u[k];
    nv += v[k] * v[k];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace trustconv
