#include "oamfso/stc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "oamfso/errors.hpp"
#include "oamfso/metrics.hpp"
#include "oamfso/numerics.hpp"

namespace oamfso {

std::string_view to_string(CodeKind kind) {
  switch (kind) {
    case CodeKind::Alamouti: return "alamouti";
    case CodeKind::GoldenLight: return "golden-light";
    case CodeKind::SpatialRepetition: return "repetition";
    case CodeKind::Uncoded: return "uncoded";
  }
  return "unknown";
}

int CodeSpec::modes() const { return kind == CodeKind::Uncoded ? 1 : 2; }

int CodeSpec::time_slots() const {
  return (kind == CodeKind::Alamouti || kind == CodeKind::GoldenLight) ? 2 : 1;
}

int CodeSpec::symbols() const {
  switch (kind) {
    case CodeKind::Alamouti: return 2;
    case CodeKind::GoldenLight: return 4;
    default: return 1;
  }
}

int CodeSpec::bits_per_codeword() const {
  return symbols() * std::countr_zero(static_cast<unsigned>(pam_order));
}

double CodeSpec::bits_per_channel_use() const {
  return static_cast<double>(bits_per_codeword()) / time_slots();
}

PepModel PepModel::from_fit(const GgdParams& sum_sq, double eta, double n0, int modes) {
  if (!(n0 > 0.0) || modes < 1) throw std::invalid_argument("PepModel: bad n0 or modes");
  return {sum_sq.scaled(eta * eta / (n0 * modes * modes))};
}

namespace stc {

namespace {

void check_pam(int pam_order) {
  if (pam_order < 2 || !std::has_single_bit(static_cast<unsigned>(pam_order)) ||
      pam_order > 256)
    throw std::invalid_argument("PAM order must be a power of two in [2, 256]");
}

void check_symbol(int s, int pam_order) {
  if (s < 0 || s >= pam_order) throw std::invalid_argument("PAM symbol out of range");
}

Eigen::MatrixXd raw_codeword(const CodeSpec& spec, const std::vector<int>& s) {
  switch (spec.kind) {
    case CodeKind::Alamouti: return alamouti_encode(s[0], s[1], spec.pam_order);
    case CodeKind::GoldenLight: return gl_encode({s[0], s[1], s[2], s[3]}, spec.pam_order);
    case CodeKind::SpatialRepetition: {
      Eigen::MatrixXd x(1, 2);
      x << s[0], s[0];
      return x;
    }
    case CodeKind::Uncoded: {
      Eigen::MatrixXd x(1, 1);
      x << s[0];
      return x;
    }
  }
  throw std::invalid_argument("unknown code");
}

// ||y - eta x I||^2 with x (T x M), I (M x R) and y (T x R), all row-major.
double distance(const double* y, const double* x, const double* chan, double eta,
                int t_slots, int m, int r) {
  double d = 0.0;
  for (int t = 0; t < t_slots; ++t) {
    for (int n = 0; n < r; ++n) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += x[t * m + k] * chan[k * r + n];
      const double e = y[t * r + n] - eta * s;
      d += e * e;
    }
  }
  return d;
}

std::vector<double> flatten(const Eigen::MatrixXd& a) {
  std::vector<double> out(a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out[i * a.cols() + j] = a(i, j);
  return out;
}

}  // namespace

Eigen::MatrixXd alamouti_encode(int s1, int s2, int pam_order) {
  check_pam(pam_order);
  check_symbol(s1, pam_order);
  check_symbol(s2, pam_order);
  Eigen::MatrixXd x(2, 2);
  x << s1, s2, pam_order - 1 - s2, s1;
  return x;
}

Eigen::MatrixXd gl_encode(const std::array<int, 4>& s, int pam_order) {
  check_pam(pam_order);
  for (int v : s) check_symbol(v, pam_order);
  const double r5 = std::sqrt(5.0);
  const double z1 = 0.5 * (1.0 + r5);
  const double z2 = 2.0 + r5;
  const double z1c = 0.5 * (r5 - 1.0);
  const double z2c = r5 - 2.0;
  Eigen::MatrixXd x(2, 2);
  x(0, 0) = (s[0] - s[1] * z1) / std::sqrt(1.0 + z1 * z1);
  x(0, 1) = (s[2] + s[3] * z2c) / std::sqrt(1.0 + z2c * z2c);
  x(1, 0) = (s[2] - s[3] * z2) / std::sqrt(1.0 + z2 * z2);
  x(1, 1) = (s[0] + s[1] * z1c) / std::sqrt(1.0 + z1c * z1c);
  return x;
}

Codebook make_codebook(const CodeSpec& spec) {
  check_pam(spec.pam_order);
  Codebook book;
  book.spec = spec;
  const int n_symbols = spec.symbols();
  const int count = 1 << spec.bits_per_codeword();
  double total = 0.0;
  std::vector<int> s(n_symbols);
  for (int label = 0; label < count; ++label) {
    int rest = label;
    for (int i = n_symbols - 1; i >= 0; --i) {
      s[i] = rest % spec.pam_order;
      rest /= spec.pam_order;
    }
    Codeword w{raw_codeword(spec, s), label};
    total += w.x.sum();
    book.words.push_back(std::move(w));
  }
  const double per_slot = total / (static_cast<double>(count) * spec.time_slots());
  if (!(per_slot > 0.0)) throw NumericError("make_codebook: zero average optical power");
  book.power_scale = 1.0 / per_slot;
  for (auto& w : book.words) w.x *= book.power_scale;
  return book;
}

int ml_decode(const Eigen::MatrixXd& y, const Eigen::MatrixXd& channel,
              const Codebook& codebook, double eta) {
  if (codebook.words.empty()) throw std::invalid_argument("ml_decode: empty codebook");
  int best = codebook.words.front().label;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& w : codebook.words) {
    const double d = (y - eta * w.x * channel).squaredNorm();
    if (d < best_d || (d == best_d && w.label < best)) {
      best_d = d;
      best = w.label;
    }
  }
  return best;
}

std::vector<double> codeword_eigenvalues(const Eigen::MatrixXd& x_i,
                                         const Eigen::MatrixXd& x_j) {
  if (x_i.rows() != x_j.rows() || x_i.cols() != x_j.cols())
    throw std::invalid_argument("codeword_eigenvalues: shape mismatch");
  const Eigen::MatrixXd d = x_i - x_j;
  const Eigen::MatrixXd gram = d.transpose() * d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

std::optional<double> orthogonal_distance(const Eigen::MatrixXd& x_i,
                                          const Eigen::MatrixXd& x_j, double tol) {
  if (x_i.rows() != x_j.rows() || x_i.cols() != x_j.cols())
    throw std::invalid_argument("orthogonal_distance: shape mismatch");
  const Eigen::MatrixXd d = x_i - x_j;
  const Eigen::MatrixXd gram = d.transpose() * d;
  const double z = gram.trace() / static_cast<double>(gram.rows());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
  if ((gram - z * id).norm() < tol) return z;
  return std::nullopt;
}

double pep_orthogonal(double z_delta, const PepModel& model) {
  if (!(z_delta >= 0.0)) throw std::domain_error("pep_orthogonal: z must be >= 0");
  if (z_delta == 0.0) return 0.5;
  static const numerics::QuadratureRule rule =
      numerics::gauss_legendre(96, 0.0, 1.5707963267948966);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double s = std::sin(rule.nodes[i]);
    sum += rule.weights[i] * ggd::laplace_transform(z_delta / (2.0 * s * s), model.gamma_perp);
  }
  return sum / 3.141592653589793;
}

double union_bound_ber(const Codebook& codebook, const PepModel& model) {
  const auto& words = codebook.words;
  if (words.size() < 2) return 0.0;
  const double bits = codebook.spec.bits_per_codeword();
  // Distances repeat heavily; key them on a rounded value.
  std::map<long long, double> cache;
  double total = 0.0;
  for (const auto& wi : words) {
    for (const auto& wj : words) {
      if (wi.label == wj.label) continue;
      const auto z = orthogonal_distance(wi.x, wj.x);
      if (!z)
        throw UnsupportedOperation(
            "union bound needs difference Grams that are scaled identities");
      const auto key = std::llround(*z * 1e9);
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, pep_orthogonal(*z, model)).first;
      const int hamming = std::popcount(static_cast<unsigned>(wi.label ^ wj.label));
      total += hamming / bits * it->second;
    }
  }
  return total / static_cast<double>(words.size());
}

std::vector<double> sum_squared_gains(const IrradianceSampleSet& samples,
                                      const ModeSet& modes) {
  std::vector<double> out(samples.size(), 0.0);
  for (int m : modes) {
    for (int n : modes) {
      const auto& col = samples.channel(m, n);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += col[k] * col[k];
    }
  }
  return out;
}

namespace {

struct ChunkResult {
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
  std::uint64_t codewords = 0;
};

constexpr std::uint64_t kChunk = 4096;

}  // namespace

std::vector<BerPoint> simulate_ber(const Codebook& codebook,
                                   const IrradianceSampleSet& samples,
                                   const ModeSet& modes, std::span<const double> mu_db,
                                   std::uint64_t master_seed, const SimulationOptions& opts,
                                   unsigned jobs) {
  const CodeSpec& spec = codebook.spec;
  const int m = spec.modes();
  const int t_slots = spec.time_slots();
  if (codebook.words.empty()) throw std::invalid_argument("simulate_ber: empty codebook");
  if (static_cast<int>(modes.size()) < m)
    throw std::invalid_argument("simulate_ber: code needs more modes than given");
  if (samples.size() == 0) throw MissingInputError("simulate_ber: no channel samples");
  std::vector<int> used(modes.begin(), modes.begin() + m);
  const ModeSet used_modes(used);
  // Channel matrices, row-major m x m, one per realization.
  std::vector<double> channels;
  channels.reserve(samples.size() * m * m);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto mat = samples.matrix(k, used_modes, used_modes);
    channels.insert(channels.end(), mat.begin(), mat.end());
  }
  std::vector<std::vector<double>> words;
  for (const auto& w : codebook.words) words.push_back(flatten(w.x));
  const int n_words = static_cast<int>(words.size());
  const std::uint64_t bits_per_word = spec.bits_per_codeword();
  jobs = std::max(1u, jobs);

  auto run_chunk = [&](std::size_t point, std::uint64_t chunk, double eta,
                       std::uint64_t n) {
    Rng rng = Rng::substream(master_seed, {point, chunk});
    ChunkResult res;
    std::vector<double> y(t_slots * m);
    for (std::uint64_t c = 0; c < n; ++c) {
      const int label = static_cast<int>(rng.below(n_words));
      const double* chan = channels.data() + rng.below(samples.size()) * m * m;
      const double* x = words[label].data();
      for (int t = 0; t < t_slots; ++t) {
        for (int j = 0; j < m; ++j) {
          double s = 0.0;
          for (int k = 0; k < m; ++k) s += x[t * m + k] * chan[k * m + j];
          y[t * m + j] = eta * s + rng.normal();
        }
      }
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int w = 0; w < n_words; ++w) {
        const double d = distance(y.data(), words[w].data(), chan, eta, t_slots, m, m);
        if (d < best_d) {
          best_d = d;
          best = w;
        }
      }
      res.errors += std::popcount(static_cast<unsigned>(codebook.words[label].label ^
                                                        codebook.words[best].label));
      res.bits += bits_per_word;
      ++res.codewords;
    }
    return res;
  };

  std::vector<BerPoint> out;
  for (std::size_t point = 0; point < mu_db.size(); ++point) {
    BerPoint bp;
    bp.mu_db = mu_db[point];
    const double eta = std::sqrt(db_to_linear(mu_db[point]));
    const std::uint64_t n_chunks = (opts.max_codewords + kChunk - 1) / kChunk;
    std::uint64_t codewords = 0;
    bool done = false;
    for (std::uint64_t first = 0; first < n_chunks && !done; first += jobs) {
      const std::uint64_t batch = std::min<std::uint64_t>(jobs, n_chunks - first);
      std::vector<ChunkResult> results(batch);
      auto size_of = [&](std::uint64_t chunk) {
        return std::min(kChunk, opts.max_codewords - chunk * kChunk);
      };
      if (batch == 1) {
        results[0] = run_chunk(point, first, eta, size_of(first));
      } else {
        std::vector<std::jthread> pool;
        for (std::uint64_t b = 0; b < batch; ++b)
          pool.emplace_back([&, b] { results[b] = run_chunk(point, first + b, eta, size_of(first + b)); });
      }
      // Accumulate in chunk order so the stopping point does not depend on jobs.
      for (const auto& r : results) {
        bp.bit_errors += r.errors;
        bp.bits += r.bits;
        codewords += r.codewords;
        if (bp.bit_errors >= opts.min_bit_errors) {
          done = true;
          break;
        }
      }
    }
    bp.insufficient = bp.bit_errors < opts.min_bit_errors;
    bp.ber = bp.bits ? static_cast<double>(bp.bit_errors) / static_cast<double>(bp.bits) : 0.0;
    out.push_back(bp);
  }
  return out;
}

void write_codebook(std::ostream& out, const Codebook& codebook) {
  out << "# code " << to_string(codebook.spec.kind) << " pam " << codebook.spec.pam_order
      << " power_scale " << codebook.power_scale << "\n";
  out.precision(17);
  for (const auto& w : codebook.words) {
    out << "label " << w.label << "\n";
    for (Eigen::Index i = 0; i < w.x.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.x.cols(); ++j) out << (j ? " " : "  ") << w.x(i, j);
      out << "\n";
    }
  }
}

}  // namespace stc
}  // namespace oamfso
