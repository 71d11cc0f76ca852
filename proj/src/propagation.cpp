#include "oamfso/propagation.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <mutex>
#include <thread>

#include "oamfso/errors.hpp"
#include "oamfso/fft.hpp"

namespace oamfso {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join(const ModeSet& modes) {
  std::string out;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(modes[i]);
  }
  return out;
}

std::vector<cdouble> transfer_function(const GridSpec& grid, double dz, double k) {
  const int n = grid.n_points;
  const double dkappa = 2.0 * std::numbers::pi / (n * grid.dx);
  const double norm = 1.0 / (static_cast<double>(n) * n);
  std::vector<cdouble> h(grid.cell_count());
  for (int iy = 0; iy < n; ++iy) {
    const double ky = dkappa * (iy < n / 2 ? iy : iy - n);
    for (int ix = 0; ix < n; ++ix) {
      const double kx = dkappa * (ix < n / 2 ? ix : ix - n);
      const double phase = (kx * kx + ky * ky) * dz / (2.0 * k);
      h[static_cast<std::size_t>(iy) * n + ix] = std::polar(norm, phase);
    }
  }
  return h;
}

}  // namespace

void ChannelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("wavelength must be positive");
  if (!(w0 > 0.0) || !std::isfinite(w0)) fail("beam waist must be positive");
  if (!(z_total > 0.0) || !std::isfinite(z_total)) fail("distance must be positive");
  if (n_screens < 1) fail("need at least one phase screen");
  try {
    grid.validate();
    turbulence.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (tx_modes.size() == 0 || rx_modes.size() == 0) fail("mode sets must be non-empty");
  const double d_rx = receiver_diameter();
  if (d_rx > grid.side_length()) {
    std::ostringstream msg;
    msg << "receiver diameter " << d_rx << " m exceeds grid side "
        << grid.side_length() << " m";
    fail(msg.str());
  }
}

double ChannelConfig::wavenumber() const { return 2.0 * std::numbers::pi / lambda; }

double ChannelConfig::receiver_diameter() const {
  const int m_max = std::max(tx_modes.max_abs(), rx_modes.max_abs());
  const LGModeSpec gaussian{0, 0, w0, lambda};
  return 2.0 * gaussian.beam_radius(z_total) * std::sqrt(static_cast<double>(m_max));
}

std::string ChannelConfig::canonical_text() const {
  std::ostringstream out;
  out << "wavelength=" << shortest(lambda) << "\n"
      << "beam_waist=" << shortest(w0) << "\n"
      << "distance=" << shortest(z_total) << "\n"
      << "screens=" << n_screens << "\n"
      << "grid_points=" << grid.n_points << "\n"
      << "grid_spacing=" << shortest(grid.dx) << "\n"
      << "cn2=" << shortest(turbulence.cn2) << "\n"
      << "inner_scale=" << shortest(turbulence.inner_scale) << "\n"
      << "outer_scale=" << shortest(turbulence.outer_scale) << "\n"
      << "screen_gain=" << shortest(turbulence.screen_gain) << "\n"
      << "tx_modes=" << join(tx_modes) << "\n"
      << "rx_modes=" << join(rx_modes) << "\n"
      << "absorber=" << (absorber ? "true" : "false") << "\n";
  return out.str();
}

std::string channel_digest(const ChannelConfig& cfg, std::uint64_t master_seed) {
  const std::string text =
      "oam-irradiance v1\n" + cfg.canonical_text() + "seed=" + std::to_string(master_seed) + "\n";
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("channel_digest: SHA-256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

IrradianceSampleSet::IrradianceSampleSet(std::string digest, std::vector<int> tx,
                                         std::vector<int> rx)
    : digest_(std::move(digest)), tx_(std::move(tx)), rx_(std::move(rx)) {
  for (int m : tx_)
    for (int n : rx_) values_[{m, n}];
}

bool IrradianceSampleSet::has_channel(int m, int n) const {
  return values_.count({m, n}) != 0;
}

const std::vector<double>& IrradianceSampleSet::channel(int m, int n) const {
  auto it = values_.find({m, n});
  if (it == values_.end())
    throw MissingInputError("sample set has no channel (" + std::to_string(m) +
                            ", " + std::to_string(n) + ")");
  return it->second;
}

std::vector<double> IrradianceSampleSet::matrix(std::size_t k, const ModeSet& tx,
                                                const ModeSet& rx) const {
  std::vector<double> out;
  out.reserve(tx.size() * rx.size());
  for (int m : tx)
    for (int n : rx) out.push_back(channel(m, n).at(k));
  return out;
}

void IrradianceSampleSet::add(const ChannelRealization& r) {
  if (r.tx != tx_ || r.rx != rx_)
    throw std::invalid_argument("sample set: realization mode sets differ");
  indices_.push_back(r.index);
  for (std::size_t i = 0; i < tx_.size(); ++i)
    for (std::size_t j = 0; j < rx_.size(); ++j)
      values_[{tx_[i], rx_[j]}].push_back(r.at(i, j));
}

void IrradianceSampleSet::add_value(std::uint64_t index, int m, int n, double value) {
  if (indices_.empty() || indices_.back() != index) indices_.push_back(index);
  if (std::find(tx_.begin(), tx_.end(), m) == tx_.end()) tx_.push_back(m);
  if (std::find(rx_.begin(), rx_.end(), n) == rx_.end()) rx_.push_back(n);
  auto& column = values_[{m, n}];
  if (column.size() + 1 != indices_.size())
    throw MissingInputError("sample store: realization " + std::to_string(index) +
                            " is misaligned at channel (" + std::to_string(m) +
                            ", " + std::to_string(n) + ")");
  column.push_back(value);
}

void IrradianceSampleSet::check_aligned() const {
  for (const auto& [key, column] : values_) {
    if (column.size() != indices_.size())
      throw MissingInputError("sample set: channel (" + std::to_string(key.first) +
                              ", " + std::to_string(key.second) +
                              ") does not cover every realization");
  }
}

ComplexField angular_spectrum_step(const ComplexField& u, double dz, double k) {
  // Negative dz back-propagates.
  if (!std::isfinite(dz)) throw std::invalid_argument("angular_spectrum_step: dz is not finite");
  const auto h = transfer_function(u.grid(), dz, k);
  std::vector<cdouble> v(u.values().begin(), u.values().end());
  Fft2d fft(u.grid().n_points);
  fft.forward(v);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= h[i];
  fft.backward(v);
  return ComplexField(u.grid(), std::move(v));
}

struct ChannelSimulator::Workspace {
  explicit Workspace(const ChannelConfig& cfg)
      : fft(cfg.grid.n_points),
        field(cfg.grid.cell_count()),
        phasors(static_cast<std::size_t>(cfg.n_screens)) {}
  Fft2d fft;
  std::vector<cdouble> field;
  std::vector<std::vector<cdouble>> phasors;
  std::vector<cdouble> work;
  std::vector<double> phase;
};

ChannelSimulator::ChannelSimulator(ChannelConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      screens_(cfg_.turbulence, cfg_.grid, cfg_.wavenumber(), cfg_.slab_length()) {
  // A beam that does not fit on the grid is a configuration problem.
  auto field = [&](int m, double z) {
    try {
      return lg_field({m, 0, cfg_.w0, cfg_.lambda}, cfg_.grid, z);
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
  };
  for (int m : cfg_.tx_modes) launch_.push_back(field(m, 0.0));
  for (int n : cfg_.rx_modes) analyzers_.push_back(field(n, cfg_.z_total));
  transfer_ = transfer_function(cfg_.grid, cfg_.slab_length(), cfg_.wavenumber());
  if (cfg_.absorber) {
    const int n = cfg_.grid.n_points;
    const double edge = 0.45 * cfg_.grid.side_length();
    absorber_.resize(cfg_.grid.cell_count());
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const double r = std::hypot(cfg_.grid.coordinate(ix), cfg_.grid.coordinate(iy));
        absorber_[static_cast<std::size_t>(iy) * n + ix] = std::exp(-std::pow(r / edge, 16));
      }
    }
  }
}

ChannelSimulator::~ChannelSimulator() = default;

std::unique_ptr<ChannelSimulator::Workspace> ChannelSimulator::make_workspace() const {
  return std::make_unique<Workspace>(cfg_);
}

ChannelRealization ChannelSimulator::realize(std::uint64_t master_seed,
                                             std::uint64_t index) const {
  auto ws = make_workspace();
  return realize(master_seed, index, *ws);
}

ChannelRealization ChannelSimulator::realize(std::uint64_t master_seed,
                                             std::uint64_t index,
                                             Workspace& ws) const {
  const std::size_t cells = cfg_.grid.cell_count();
  const bool turbulent = cfg_.turbulence.cn2 > 0.0 && cfg_.turbulence.screen_gain > 0.0;
  if (turbulent) {
    for (int s = 0; s < cfg_.n_screens; ++s) {
      Rng rng = Rng::substream(master_seed, {index, static_cast<std::uint64_t>(s)});
      screens_.generate_into(rng, ws.work, ws.phase);
      auto& ph = ws.phasors[static_cast<std::size_t>(s)];
      ph.resize(cells);
      for (std::size_t i = 0; i < cells; ++i) ph[i] = std::polar(1.0, ws.phase[i]);
    }
  }

  ChannelRealization out;
  out.index = index;
  out.tx.assign(cfg_.tx_modes.begin(), cfg_.tx_modes.end());
  out.rx.assign(cfg_.rx_modes.begin(), cfg_.rx_modes.end());
  out.i_matrix.reserve(out.tx.size() * out.rx.size());
  const double cell = cfg_.grid.dx * cfg_.grid.dx;

  for (const auto& launch : launch_) {
    std::copy(launch.values().begin(), launch.values().end(), ws.field.begin());
    for (int s = 0; s < cfg_.n_screens; ++s) {
      if (turbulent) {
        const auto& ph = ws.phasors[static_cast<std::size_t>(s)];
        for (std::size_t i = 0; i < cells; ++i) ws.field[i] *= ph[i];
      }
      ws.fft.forward(ws.field);
      for (std::size_t i = 0; i < cells; ++i) ws.field[i] *= transfer_[i];
      ws.fft.backward(ws.field);
      if (!absorber_.empty())
        for (std::size_t i = 0; i < cells; ++i) ws.field[i] *= absorber_[i];
    }
    for (const auto& analyzer : analyzers_) {
      const auto a = analyzer.values();
      double re = 0.0;
      double im = 0.0;
      for (std::size_t i = 0; i < cells; ++i) {
        re += ws.field[i].real() * a[i].real() + ws.field[i].imag() * a[i].imag();
        im += ws.field[i].imag() * a[i].real() - ws.field[i].real() * a[i].imag();
      }
      const double value = (re * re + im * im) * cell * cell;
      if (!std::isfinite(value)) out.valid = false;
      out.i_matrix.push_back(value);
    }
  }
  return out;
}

ChannelRealization propagate_realization(const ChannelConfig& cfg,
                                         std::uint64_t master_seed,
                                         std::uint64_t index) {
  return ChannelSimulator(cfg).realize(master_seed, index);
}

IrradianceSampleSet run_monte_carlo(const ChannelConfig& cfg,
                                    std::size_t n_realizations,
                                    std::uint64_t master_seed, unsigned jobs,
                                    std::uint64_t first_index) {
  if (n_realizations < 1)
    throw std::invalid_argument("run_monte_carlo: need at least one realization");
  const ChannelSimulator sim(cfg);
  std::vector<ChannelRealization> results(n_realizations);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      auto ws = sim.make_workspace();
      for (std::size_t k = next++; k < n_realizations; k = next++)
        results[k] = sim.realize(master_seed, first_index + k, *ws);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n_realizations;
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n_realizations)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<int> tx(cfg.tx_modes.begin(), cfg.tx_modes.end());
  std::vector<int> rx(cfg.rx_modes.begin(), cfg.rx_modes.end());
  IrradianceSampleSet set(channel_digest(cfg, master_seed), tx, rx);
  std::size_t excluded = 0;
  for (const auto& r : results) {
    if (r.valid)
      set.add(r);
    else
      ++excluded;
  }
  set.set_excluded(excluded);
  return set;
}

}  // namespace oamfso
