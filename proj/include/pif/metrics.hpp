#pragma once

#include <map>
#include <string>
#include <vector>

#include "pif/protocols.hpp"

namespace pif {

/// |psi_C(tR + d) - conj psi_C(tR - d)| / |psi_C(tR - d)| over sites x > x_s.
double reversal_error(const ChainModel<double>& model, const WaveField<double>& before,
                      const WaveField<double>& after);

/// Matches each backward snapshot at tR + d with the forward one at tR - d.
/// Throws when a partner is missing.
std::vector<ReversalSample> cavity_reversal_error(const ChainModel<double>& model, double tR,
                                                  const std::vector<WaveField<double>>& forward,
                                                  const std::vector<WaveField<double>>& backward);

/// Sites where |psi0|^2 >= cutoff * max |psi0|^2, as one enclosing range.
SiteRange support_of(const WaveField<double>& initial, double cutoff = 1e-12);

/// |<conj psi0 | psi>_R|^2 / (|psi0|_R^2 |psi|_R^2) over the support R of psi0.
double echo_fidelity(const WaveField<double>& echo, const WaveField<double>& initial, double cutoff = 1e-12);

/// Pearson correlation of two equally long series (shape similarity after
/// amplitude normalization).
double shape_correlation(const RealVector<double>& a, const RealVector<double>& b);

/// Largest reversal error over the significant samples.
double max_significant_error(const std::vector<ReversalSample>& series);

// Plot-ready tables, CSV with header row and %.17g numbers.
std::string snapshot_table(const ChainModel<double>& model, const WaveField<double>& field);
std::string probe_series_table(const ProtocolReport& report);
std::string reversal_table(const ProtocolReport& report);
std::string greens_time_table(const ProbeRecord<double>& response);
std::string greens_energy_table(const SpectralSignal<double>& spectrum);

/// File name -> contents. Names are relative to the output directory.
using FileSet = std::map<std::string, std::string>;

FileSet export_figures(const ChainModel<double>& model, const ProtocolReport& report);

std::string format_double(double v);

} // namespace pif
