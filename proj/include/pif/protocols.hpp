#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pif/evolve.hpp"
#include "pif/greens.hpp"
#include "pif/signal.hpp"

namespace pif {

enum class Protocol { PIF, TRM };

const char* to_string(Protocol p);

struct ProtocolConfig {
    StepperConfig stepper;
    double t_end = 0;                    ///< whole run; the forward record covers [0, t_end/2]
    WindowOptions window;
    std::optional<double> pinned_t1;     ///< override detect_window
    std::optional<double> pinned_tR;
    std::optional<double> eta;           ///< default hbar / T_rec
    std::optional<double> greens_t_max;  ///< default t_end
    double grid_padding = 4.0;
    double band_margin = 1.0;
    std::optional<Index> fft_size;       ///< pin the spectral period (refinement studies)
    double max_truncated_energy = 1e-4;
    double blowup_factor = 1e6;          ///< max |chi| relative to the recorded peak amplitude
    double max_initial_cavity = 1e-12;
    double trm_c = 1.0;
    bool trm_outgoing_only = true;       ///< TRM re-emits only what is recorded after the cavity starts emptying
    Index forward_samples = 256;         ///< stored forward states over [0, t_end/2]
    double significance = 0.01;          ///< reversal errors only where the cavity holds this share of its peak
    double support_cutoff = 1e-12;       ///< echo support: |psi0|^2 >= cutoff * max |psi0|^2
    std::vector<double> snapshot_times;

    void validate() const;
};

/// Probe record and stored states of the source-free forward evolution.
struct ForwardRun {
    ProbeRecord<double> record;
    Index stride = 1;                    ///< steps between stored states
    std::vector<WaveField<double>> states;
    RealVector<double> cavity_norm;      ///< cavity probability at each stored state
    double cavity_peak_time = 0;         ///< first time of maximal cavity probability (any step)
};

struct GreensData {
    ProbeRecord<double> response;
    SpectralSignal<double> spectrum;
};

struct ReversalSample {
    double dt_offset = 0;                ///< delta t
    double error = 0;
    double cavity_norm = 0;              ///< forward cavity probability at tR - delta t
    bool significant = true;
};

struct ProtocolReport {
    Protocol protocol = Protocol::PIF;
    bool degenerate = false;
    RecordingWindow<double> window;
    EnergyGrid<double> grid;
    double greens_t_max = 0;
    double trm_c = 0;
    double trm_record_start = 0;                ///< TRM only: recorded samples before this are not re-emitted
    InjectionSchedule<double> injection;
    TruncationReport<double> truncation;
    std::vector<WaveField<double>> snapshots;   ///< sorted by time
    std::vector<ReversalSample> reversal;
    double max_reversal_error = 0;
    double echo_fidelity = 0;                   ///< NaN for a degenerate run
    double echo_amplitude = 0;                  ///< restricted norm ratio |psi(2tR)|_R / |psi0|_R
    double initial_velocity = 0;
    double echo_velocity = 0;
    double outer_norm_start = 0;                ///< outer-region probability at tR
    double outer_norm_injection_end = 0;        ///< ... at tR + T_rec
    ProbeRecord<double> probe;                  ///< psi(x_s, t) over [0, 2tR]
};

ForwardRun run_forward(const ChainModel<double>& model, const WaveField<double>& packet,
                       const ProtocolConfig& cfg);

/// State of the forward evolution at grid time t (replayed from stored states).
WaveField<double> forward_state(const ChainModel<double>& model, const ForwardRun& fwd, const ProtocolConfig& cfg,
                                double t);

RecordingWindow<double> resolve_window(const ForwardRun& fwd, const ProtocolConfig& cfg);

EnergyGrid<double> protocol_grid(const ChainModel<double>& model, const RecordingWindow<double>& window,
                                 const ProtocolConfig& cfg);

GreensData compute_greens(const ChainModel<double>& model, const EnergyGrid<double>& grid, const ProtocolConfig& cfg);

/// Steps 4-5 with a ready injection schedule; shared by both protocols.
ProtocolReport run_reversal(const ChainModel<double>& model, const WaveField<double>& packet,
                            const ForwardRun& fwd, const RecordingWindow<double>& window,
                            InjectionResult<double> injection, const ProtocolConfig& cfg, Protocol tag);

ProtocolReport run_pif(const ChainModel<double>& model, const WaveField<double>& packet, const ProtocolConfig& cfg);

ProtocolReport run_trm(const ChainModel<double>& model, const WaveField<double>& packet, const ProtocolConfig& cfg);

/// Both protocols over one forward run; the two reversals run concurrently when asked.
std::pair<ProtocolReport, ProtocolReport> run_both(const ChainModel<double>& model, const WaveField<double>& packet,
                                                   const ProtocolConfig& cfg, bool concurrent = true);

} // namespace pif
