#pragma once

// Band-aware physical layer: channel grid, GN/ISRS first-span SNR, per-band
// worst-case SNR basis, span-scaled path SNR and capacity matrices.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mbcg/routes.hpp"
#include "mbcg/topology.hpp"

namespace mbcg {

class PhyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Bands

/// Optical bands in ascending frequency order.
enum class Band : int { U = 0, L = 1, C = 2 };
inline constexpr std::array<Band, 3> kBands{Band::U, Band::L, Band::C};
inline constexpr int kBandCount = 3;

constexpr int band_index(Band b) { return static_cast<int>(b); }

constexpr std::string_view band_name(Band b) {
  switch (b) {
    case Band::U: return "U";
    case Band::L: return "L";
    case Band::C: return "C";
  }
  return "?";
}

inline Band parse_band(std::string_view s) {
  if (s == "U") return Band::U;
  if (s == "L") return Band::L;
  if (s == "C") return Band::C;
  throw PhyError("unknown band '" + std::string(s) + "'");
}

enum class Mode { rwa, rwba };

constexpr std::string_view mode_name(Mode m) { return m == Mode::rwa ? "RWA" : "RWBA"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "RWA" || s == "rwa") return Mode::rwa;
  if (s == "RWBA" || s == "rwba") return Mode::rwba;
  throw PhyError("unknown mode '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Unit conversions

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
/// dB/km (power) to 1/km.
inline double db_per_km_to_neper(double db_per_km) { return db_per_km * std::log(10.0) / 10.0; }

// ---------------------------------------------------------------------------
// Channel grid

struct BandRange {
  Band band{Band::C};
  int first{0};  // 0-based channel index
  int count{0};
  bool contains(int w) const { return w >= first && w < first + count; }
};

using BandPartition = std::array<BandRange, kBandCount>;

/// Splits W channels into U, L, C index ranges (ascending frequency). Each band
/// gets floor(width / spacing) channels, capped by what is left; leftover
/// channels go to C, then L, then U, so the ranges always cover all W.
inline BandPartition partition_bands(int channel_count, double spacing_hz,
                                     const std::array<double, kBandCount>& widths_hz) {
  if (channel_count < 0) throw PhyError("negative channel count");
  std::array<int, kBandCount> counts{};
  int remaining = channel_count;
  for (int b = 0; b < kBandCount; ++b) {
    int nominal = static_cast<int>(std::floor(widths_hz[b] / spacing_hz + 1e-9));
    counts[b] = std::min(nominal, remaining);
    remaining -= counts[b];
  }
  for (int b = kBandCount - 1; remaining > 0; b = (b + kBandCount - 1) % kBandCount) {
    ++counts[b];
    --remaining;
  }
  BandPartition out{};
  int first = 0;
  for (int b = 0; b < kBandCount; ++b) {
    out[b] = {kBands[b], first, counts[b]};
    first += counts[b];
  }
  return out;
}

/// Equal-width split, used when an instance specifies W directly.
inline BandPartition partition_bands(int channel_count) {
  if (channel_count == 0) return partition_bands(0, 1.0, {0.0, 0.0, 0.0});
  double third = static_cast<double>(channel_count / kBandCount);
  return partition_bands(channel_count, 1.0, {third, third, third});
}

struct ChannelGrid {
  double baud_hz{0};
  double spacing_hz{0};
  double total_bandwidth_hz{0};
  double center_hz{0};
  int channel_count{0};
  std::vector<double> offsets_hz;  // f_w, symmetric about 0, ascending
  BandPartition bands{};

  const BandRange& range(Band b) const { return bands[band_index(b)]; }
  Band band_of(int w) const {
    for (const auto& r : bands) {
      if (r.contains(w)) return r.band;
    }
    throw PhyError("channel " + std::to_string(w) + " outside the grid");
  }
};

inline constexpr std::array<double, kBandCount> kDefaultBandWidthsHz{5e12, 5e12, 5e12};
inline constexpr double kDefaultTotalBandwidthHz = 15e12;
inline constexpr double kDefaultCenterHz = 190.9e12;

/// Channel spacing equals the baud rate; W = floor(B_t / R_s).
inline ChannelGrid build_grid(double baud_hz, double total_bandwidth_hz = kDefaultTotalBandwidthHz,
                              const std::array<double, kBandCount>& band_widths_hz = kDefaultBandWidthsHz,
                              double center_hz = kDefaultCenterHz) {
  if (!(baud_hz > 0)) throw PhyError("baud rate must be positive");
  if (!(total_bandwidth_hz > 0)) throw PhyError("total bandwidth must be positive");
  for (double w : band_widths_hz) {
    if (w < 0) throw PhyError("negative band width");
  }
  ChannelGrid g;
  g.baud_hz = baud_hz;
  g.spacing_hz = baud_hz;
  g.total_bandwidth_hz = total_bandwidth_hz;
  g.center_hz = center_hz;
  // Guard against 15e12/12.5e9 landing one ulp below an integer.
  g.channel_count = static_cast<int>(std::floor(total_bandwidth_hz / baud_hz * (1 + 1e-12)));
  g.offsets_hz.resize(g.channel_count);
  for (int w = 0; w < g.channel_count; ++w) {
    g.offsets_hz[w] = (w - (g.channel_count - 1) / 2.0) * g.spacing_hz;
  }
  g.bands = partition_bands(g.channel_count, g.spacing_hz, band_widths_hz);
  return g;
}

// ---------------------------------------------------------------------------
// GN model

/// (frequency Hz, value) samples, linearly interpolated and clamped at the ends.
using SpectralTable = std::vector<std::pair<double, double>>;

inline double interpolate(const SpectralTable& table, double f_hz) {
  if (table.size() == 1 || f_hz <= table.front().first) return table.front().second;
  if (f_hz >= table.back().first) return table.back().second;
  auto hi = std::lower_bound(table.begin(), table.end(), f_hz,
                             [](const auto& p, double f) { return p.first < f; });
  auto lo = hi - 1;
  double t = (f_hz - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

struct GnParams {
  double span_length_km = 80.0;
  double attenuation_db_per_km = 0.2;
  SpectralTable attenuation_table_db_per_km;  // optional, overrides the flat value
  double raman_slope = 0.028e-12;             // C_R, 1/(W km Hz)
  double raman_cutoff_hz = 15e12;             // f_R
  double noise_figure_db = 5.0;
  double planck = 6.62607015e-34;             // J s
  double beta2 = -21.7e-24;                   // s^2/km
  double gamma = 1.2;                         // 1/(W km)
  SpectralTable gamma_table;                  // optional, overrides the flat value
  double psd_w_per_hz = 14e-6 / 1e9;          // 14 uW/GHz
  bool isrs_enabled = true;

  double noise_figure() const { return db_to_linear(noise_figure_db); }
  double channel_power(const ChannelGrid& g) const { return psd_w_per_hz * g.spacing_hz; }
  double total_power(const ChannelGrid& g) const { return g.channel_count * channel_power(g); }

  double alpha(const ChannelGrid& g, int w) const {
    double db = attenuation_table_db_per_km.empty()
                    ? attenuation_db_per_km
                    : interpolate(attenuation_table_db_per_km, g.center_hz + g.offsets_hz[w]);
    return db_per_km_to_neper(db);
  }
  double gamma_at(const ChannelGrid& g, int w) const {
    return gamma_table.empty() ? gamma : interpolate(gamma_table, g.center_hz + g.offsets_hz[w]);
  }

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0) || !std::isfinite(v)) throw PhyError(std::string(what) + " must be positive");
    };
    positive(span_length_km, "span_length_km");
    positive(attenuation_db_per_km, "attenuation_db_per_km");
    positive(raman_slope, "raman_slope");
    positive(raman_cutoff_hz, "raman_cutoff_hz");
    positive(planck, "planck");
    positive(gamma, "gamma");
    positive(psd_w_per_hz, "psd_w_per_hz");
    if (!std::isfinite(noise_figure_db)) throw PhyError("noise_figure_db must be finite");
    if (!std::isfinite(beta2)) throw PhyError("beta2 must be finite");
  }
};

struct EffectiveAttenuation {
  double alpha_eff;  // 1/km
  double length_eff;  // km
};

inline void check_channel(const ChannelGrid& g, int w) {
  if (w < 0 || w >= g.channel_count) throw PhyError("channel index " + std::to_string(w) + " out of range");
}

/// Linear ISRS tilt folded into the attenuation: the span's log-power tilt
/// P_t * C_R * L_eff * f_w (f_w clamped to +-f_R) divided by L_s. Negative
/// offsets (U-band side) get a smaller alpha_eff, i.e. Raman gain.
inline EffectiveAttenuation effective_attenuation(const GnParams& p, const ChannelGrid& g, int w) {
  check_channel(g, w);
  const double alpha = p.alpha(g, w);
  double alpha_eff = alpha;
  if (p.isrs_enabled) {
    const double f = std::clamp(g.offsets_hz[w], -p.raman_cutoff_hz, p.raman_cutoff_hz);
    const double l_eff = (1.0 - std::exp(-alpha * p.span_length_km)) / alpha;
    alpha_eff = alpha + p.total_power(g) * p.raman_slope * l_eff * f / p.span_length_km;
  }
  if (!(alpha_eff > 0)) throw PhyError("ISRS tilt drives the effective attenuation nonpositive");
  return {alpha_eff, (1.0 - std::exp(-alpha_eff * p.span_length_km)) / alpha_eff};
}

/// exp(alpha_eff L_s) * NF * R_s * h * (f_c + f_w), watts.
inline double ase_power(const GnParams& p, const ChannelGrid& g, int w) {
  const auto att = effective_attenuation(p, g, w);
  return std::exp(att.alpha_eff * p.span_length_km) * p.noise_figure() * g.baud_hz * p.planck *
         (g.center_hz + g.offsets_hz[w]);
}

/// Incoherent GN nonlinear coefficient, 1/W^2.
inline double nli_coefficient(const GnParams& p, const ChannelGrid& g, int w) {
  if (p.beta2 == 0.0) throw PhyError("beta2 = 0 makes the NLI coefficient singular");
  const auto att = effective_attenuation(p, g, w);
  const double gam = p.gamma_at(g, w);
  const double b2 = std::abs(p.beta2);
  const double pi = std::numbers::pi;
  const double bt = g.total_bandwidth_hz;
  return 8.0 / 27.0 * gam * gam * att.alpha_eff * att.length_eff * att.length_eff *
         std::asinh(pi * pi * b2 * bt * bt / (2.0 * att.alpha_eff)) / (pi * b2 * g.baud_hz * g.baud_hz);
}

/// Linear first-span SNR at launch power P0 (defaults to psd * B_ch).
inline double first_span_snr(const GnParams& p, const ChannelGrid& g, int w,
                             std::optional<double> launch_power_w = std::nullopt) {
  const double p0 = launch_power_w.value_or(p.channel_power(g));
  if (!(p0 > 0)) throw PhyError("launch power must be positive");
  return p0 / (ase_power(p, g, w) + nli_coefficient(p, g, w) * p0 * p0 * p0);
}

/// Minimum first-span SNR over the band's channels, dB.
inline double band_worst_snr(const GnParams& p, const ChannelGrid& g, Band band) {
  const auto& r = g.range(band);
  if (r.count == 0) throw PhyError("band " + std::string(band_name(band)) + " has no channels");
  double worst = std::numeric_limits<double>::infinity();
  for (int w = r.first; w < r.first + r.count; ++w) worst = std::min(worst, first_span_snr(p, g, w));
  return linear_to_db(worst);
}

/// SNR after N spans: SNR1 - 10 log10 N - M, all in dB.
inline double path_snr_db(double first_span_snr_db, int span_total, double margin_db) {
  if (span_total < 1) throw PhyError("span total must be >= 1");
  return first_span_snr_db - 10.0 * std::log10(static_cast<double>(span_total)) - margin_db;
}

// ---------------------------------------------------------------------------
// Modulation formats

struct ModulationFormat {
  std::string name;
  double spectral_efficiency;  // bit/s/Hz
  double required_snr_db;
};

class ModulationTable {
 public:
  ModulationTable() = default;
  explicit ModulationTable(std::vector<ModulationFormat> formats) : formats_(std::move(formats)) {
    if (formats_.empty()) throw PhyError("modulation table is empty");
    for (std::size_t i = 1; i < formats_.size(); ++i) {
      if (!(formats_[i].spectral_efficiency > formats_[i - 1].spectral_efficiency) ||
          !(formats_[i].required_snr_db > formats_[i - 1].required_snr_db)) {
        throw PhyError("modulation table must be strictly increasing in efficiency and required SNR");
      }
    }
  }

  const std::vector<ModulationFormat>& formats() const { return formats_; }
  std::size_t size() const { return formats_.size(); }
  const ModulationFormat& operator[](std::size_t i) const { return formats_.at(i); }

  /// The `n` lowest-order formats.
  ModulationTable prefix(std::size_t n) const {
    if (n < 1 || n > formats_.size()) throw PhyError("formats prefix out of range");
    return ModulationTable({formats_.begin(), formats_.begin() + static_cast<std::ptrdiff_t>(n)});
  }

  /// Highest-order format whose required SNR is met, or nullopt.
  std::optional<std::size_t> select(double snr_db) const {
    std::optional<std::size_t> best;
    for (std::size_t m = 0; m < formats_.size(); ++m) {
      if (formats_[m].required_snr_db <= snr_db) best = m;
    }
    return best;
  }

 private:
  std::vector<ModulationFormat> formats_;
};

inline ModulationTable default_modulation_table() {
  return ModulationTable({{"PM-BPSK", 1.6, 3.7},
                          {"PM-QPSK", 3.1, 6.7},
                          {"PM-8QAM", 4.7, 10.8},
                          {"PM-16QAM", 6.3, 13.2},
                          {"PM-32QAM", 7.8, 16.2},
                          {"PM-64QAM", 9.4, 19.0},
                          {"PM-128QAM", 10.9, 21.8},
                          {"PM-256QAM", 12.5, 24.7}});
}

inline std::optional<std::size_t> select_modulation(const ModulationTable& table, double snr_db) {
  return table.select(snr_db);
}

// ---------------------------------------------------------------------------
// Per-band SNR basis

struct BandSpec {
  Band band{Band::C};
  double width_hz{5e12};
  double first_span_snr_db{0};
  double margin_db{0};
  int wavelength_budget{0};
};

using BandSpecs = std::array<BandSpec, kBandCount>;

/// Everything the optimizer needs from the physical layer.
struct PhysicalEnvironment {
  GnParams gn;
  double total_bandwidth_hz = kDefaultTotalBandwidthHz;
  double center_hz = kDefaultCenterHz;
  std::array<double, kBandCount> band_widths_hz = kDefaultBandWidthsHz;
  /// Worst-case first-span SNR per band (U, L, C), dB.
  std::array<double, kBandCount> first_span_snr_db{24.8, 24.5, 20.4};
  /// Replace the basis above with GN estimates at the sweep's baud rate.
  bool use_gn_estimate = false;
  std::optional<std::array<double, kBandCount>> rwba_margins_db;
  std::optional<std::array<double, kBandCount>> rwa_margins_db;
  ModulationTable modulation = default_modulation_table();

  ChannelGrid grid(double baud_hz) const {
    return build_grid(baud_hz, total_bandwidth_hz, band_widths_hz, center_hz);
  }
};

/// GN estimate of the per-band worst first-span SNR (dB) on `grid`.
inline std::array<double, kBandCount> estimate_band_snr(const GnParams& p, const ChannelGrid& grid) {
  std::array<double, kBandCount> out{};
  for (Band b : kBands) out[band_index(b)] = band_worst_snr(p, grid, b);
  return out;
}

/// Band specs for a mode. RWBA keeps each band's own basis (margin 0 by
/// default); RWA applies margins that flatten all bands to the worst band.
inline BandSpecs band_specs(const PhysicalEnvironment& env, const ChannelGrid& grid, Mode mode) {
  auto snr = env.use_gn_estimate ? estimate_band_snr(env.gn, grid) : env.first_span_snr_db;
  const double flat = *std::min_element(snr.begin(), snr.end());
  BandSpecs specs{};
  for (Band b : kBands) {
    const int i = band_index(b);
    double margin = 0.0;
    if (mode == Mode::rwa) {
      margin = env.rwa_margins_db ? (*env.rwa_margins_db)[i] : snr[i] - flat;
    } else if (env.rwba_margins_db) {
      margin = (*env.rwba_margins_db)[i];
    }
    specs[i] = {b, env.band_widths_hz[i], snr[i], margin, grid.range(b).count};
  }
  return specs;
}

// ---------------------------------------------------------------------------
// Capacity matrix

/// Capacity (bit/s) per (route, band). In RWA mode all bands carry the
/// same value, which is the (s,d,k) view.
class CapacityMatrix {
 public:
  CapacityMatrix() = default;
  CapacityMatrix(Mode mode, std::vector<std::array<double, kBandCount>> values)
      : mode_(mode), values_(std::move(values)) {}

  Mode mode() const { return mode_; }
  std::size_t route_count() const { return values_.size(); }
  double at(RouteId r, Band b) const { return values_.at(r)[band_index(b)]; }
  double rwa(RouteId r) const { return at(r, Band::C); }
  void set(RouteId r, Band b, double v) { values_.at(r)[band_index(b)] = v; }

  /// Smallest positive entry; 0 when every entry is 0.
  double min_positive() const {
    double best = 0.0;
    for (const auto& row : values_) {
      for (double v : row) {
        if (v > 0 && (best == 0.0 || v < best)) best = v;
      }
    }
    return best;
  }

 private:
  Mode mode_{Mode::rwa};
  std::vector<std::array<double, kBandCount>> values_;
};

inline double lightpath_capacity(const ModulationTable& table, double baud_hz, double snr_db) {
  auto m = table.select(snr_db);
  return m ? table[*m].spectral_efficiency * baud_hz : 0.0;
}

/// C_{s,d,k,b} = S_m * R_s for the best format meeting the route's end-to-end SNR.
inline CapacityMatrix capacity_matrix(const RouteSet& routes, const BandSpecs& bands, double baud_hz,
                                      const ModulationTable& table, Mode mode) {
  std::vector<std::array<double, kBandCount>> values(routes.size());
  for (RouteId r = 0; r < static_cast<RouteId>(routes.size()); ++r) {
    const int spans = routes.route(r).span_total;
    for (const auto& spec : bands) {
      values[r][band_index(spec.band)] =
          lightpath_capacity(table, baud_hz, path_snr_db(spec.first_span_snr_db, spans, spec.margin_db));
    }
  }
  return CapacityMatrix(mode, std::move(values));
}

/// Convenience: capacity matrix for `mode` with the first `formats_allowed`
/// formats of the environment's table.
inline CapacityMatrix capacity_matrix(const RouteSet& routes, const PhysicalEnvironment& env,
                                      const ChannelGrid& grid, Mode mode, std::size_t formats_allowed) {
  return capacity_matrix(routes, band_specs(env, grid, mode), grid.baud_hz,
                         env.modulation.prefix(formats_allowed), mode);
}

/// One `s,d,k,band,capacity_bps` row per route and band; RWA matrices list the
/// flat value once with band "-".
inline void write_capacity_csv(std::ostream& out, const NetworkTopology& topo, const RouteSet& routes,
                               const CapacityMatrix& cap) {
  out << "s,d,k,band,capacity_bps\n";
  const auto old = out.precision(17);
  for (RouteId r = 0; r < static_cast<RouteId>(routes.size()); ++r) {
    const auto& route = routes.route(r);
    const auto prefix = topo.node_name(route.source) + "," + topo.node_name(route.destination) + "," +
                        std::to_string(route.index) + ",";
    if (cap.mode() == Mode::rwa) {
      out << prefix << "-," << cap.rwa(r) << "\n";
      continue;
    }
    for (Band b : kBands) out << prefix << band_name(b) << "," << cap.at(r, b) << "\n";
  }
  out.precision(old);
}

// ---------------------------------------------------------------------------
// Config I/O

inline PhysicalEnvironment physical_environment_from_json(const nlohmann::json& j) {
  PhysicalEnvironment env;
  try {
    if (auto it = j.find("gn"); it != j.end()) {
      const auto& g = *it;
      auto& p = env.gn;
      p.span_length_km = g.value("span_length_km", p.span_length_km);
      p.attenuation_db_per_km = g.value("attenuation_db_per_km", p.attenuation_db_per_km);
      p.raman_slope = g.value("raman_slope", p.raman_slope);
      p.raman_cutoff_hz = g.value("raman_cutoff_hz", p.raman_cutoff_hz);
      p.noise_figure_db = g.value("noise_figure_db", p.noise_figure_db);
      p.planck = g.value("planck", p.planck);
      p.beta2 = g.value("beta2", p.beta2);
      p.gamma = g.value("gamma", p.gamma);
      p.psd_w_per_hz = g.value("psd_w_per_hz", p.psd_w_per_hz);
      p.isrs_enabled = g.value("isrs_enabled", p.isrs_enabled);
      if (g.contains("attenuation_table_db_per_km")) {
        p.attenuation_table_db_per_km = g.at("attenuation_table_db_per_km").get<SpectralTable>();
      }
      if (g.contains("gamma_table")) p.gamma_table = g.at("gamma_table").get<SpectralTable>();
    }
    env.total_bandwidth_hz = j.value("total_bandwidth_hz", env.total_bandwidth_hz);
    env.center_hz = j.value("center_hz", env.center_hz);
    if (j.contains("band_widths_hz")) env.band_widths_hz = j.at("band_widths_hz").get<std::array<double, 3>>();
    if (j.contains("first_span_snr_db")) {
      env.first_span_snr_db = j.at("first_span_snr_db").get<std::array<double, 3>>();
    }
    env.use_gn_estimate = j.value("use_gn_estimate", env.use_gn_estimate);
    if (j.contains("rwba_margins_db")) env.rwba_margins_db = j.at("rwba_margins_db").get<std::array<double, 3>>();
    if (j.contains("rwa_margins_db")) env.rwa_margins_db = j.at("rwa_margins_db").get<std::array<double, 3>>();
    if (j.contains("modulation")) {
      std::vector<ModulationFormat> formats;
      for (const auto& f : j.at("modulation")) {
        formats.push_back({f.at("name").get<std::string>(), f.at("spectral_efficiency").get<double>(),
                           f.at("required_snr_db").get<double>()});
      }
      env.modulation = ModulationTable(std::move(formats));
    }
  } catch (const nlohmann::json::exception& e) {
    throw PhyError(std::string("phy config: ") + e.what());
  }
  env.gn.validate();
  return env;
}

inline nlohmann::json to_json(const PhysicalEnvironment& env) {
  const auto& p = env.gn;
  nlohmann::json gn = {{"span_length_km", p.span_length_km},
                       {"attenuation_db_per_km", p.attenuation_db_per_km},
                       {"raman_slope", p.raman_slope},
                       {"raman_cutoff_hz", p.raman_cutoff_hz},
                       {"noise_figure_db", p.noise_figure_db},
                       {"planck", p.planck},
                       {"beta2", p.beta2},
                       {"gamma", p.gamma},
                       {"psd_w_per_hz", p.psd_w_per_hz},
                       {"isrs_enabled", p.isrs_enabled}};
  if (!p.attenuation_table_db_per_km.empty()) gn["attenuation_table_db_per_km"] = p.attenuation_table_db_per_km;
  if (!p.gamma_table.empty()) gn["gamma_table"] = p.gamma_table;
  nlohmann::json mod = nlohmann::json::array();
  for (const auto& f : env.modulation.formats()) {
    mod.push_back({{"name", f.name}, {"spectral_efficiency", f.spectral_efficiency}, {"required_snr_db", f.required_snr_db}});
  }
  nlohmann::json j = {{"gn", gn},
                      {"total_bandwidth_hz", env.total_bandwidth_hz},
                      {"center_hz", env.center_hz},
                      {"band_widths_hz", env.band_widths_hz},
                      {"first_span_snr_db", env.first_span_snr_db},
                      {"use_gn_estimate", env.use_gn_estimate},
                      {"modulation", mod}};
  if (env.rwba_margins_db) j["rwba_margins_db"] = *env.rwba_margins_db;
  if (env.rwa_margins_db) j["rwa_margins_db"] = *env.rwa_margins_db;
  return j;
}

}  // namespace mbcg
