#include "pif/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pif {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double reversal_error(const ChainModel<double>& model, const WaveField<double>& before,
                      const WaveField<double>& after) {
    detail::require_same_length(before.size(), model.n_sites());
    detail::require_same_length(after.size(), model.n_sites());
    const SiteRange c = cavity_region(model);
    const auto b = before.amplitudes.segment(c.first, c.size());
    const auto a = after.amplitudes.segment(c.first, c.size());
    const double denom = b.norm();
    const double num = (a - b.conjugate()).norm();
    if (denom == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / denom;
}

std::vector<ReversalSample> cavity_reversal_error(const ChainModel<double>& model, double tR,
                                                  const std::vector<WaveField<double>>& forward,
                                                  const std::vector<WaveField<double>>& backward) {
    const SiteRange c = cavity_region(model);
    std::vector<ReversalSample> out;
    for (const auto& b : backward) {
        const double d = b.time - tR;
        const auto partner = std::find_if(forward.begin(), forward.end(), [&](const WaveField<double>& f) {
            return std::abs((tR - f.time) - d) <= 1e-9 * std::max(1.0, tR);
        });
        if (partner == forward.end()) {
            throw ValidationError("no forward snapshot at tR - " + format_double(d));
        }
        out.push_back({d, reversal_error(model, *partner, b), norm(*partner, c), true});
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.dt_offset < y.dt_offset; });
    return out;
}

SiteRange support_of(const WaveField<double>& initial, double cutoff) {
    const RealVector<double> dens = initial.amplitudes.cwiseAbs2();
    const double peak = dens.size() ? dens.maxCoeff() : 0.0;
    if (!(peak > 0)) throw ValidationError("initial state is zero: no support");
    Index first = 0, last = dens.size() - 1;
    while (dens[first] < cutoff * peak) ++first;
    while (dens[last] < cutoff * peak) --last;
    return {first, last + 1};
}

double echo_fidelity(const WaveField<double>& echo, const WaveField<double>& initial, double cutoff) {
    detail::require_same_length(echo.size(), initial.size());
    const SiteRange r = support_of(initial, cutoff);
    const auto target = initial.amplitudes.segment(r.first, r.size()).conjugate().eval();
    const auto got = echo.amplitudes.segment(r.first, r.size());
    const double nt = target.squaredNorm();
    const double ng = got.squaredNorm();
    if (ng == 0.0) return 0.0;
    return std::norm(target.dot(got)) / (nt * ng);
}

double shape_correlation(const RealVector<double>& a, const RealVector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw ValidationError("shape correlation needs equal series of length >= 2");
    const RealVector<double> x = a.array() - a.mean();
    const RealVector<double> y = b.array() - b.mean();
    const double den = x.norm() * y.norm();
    if (den == 0.0) throw ValidationError("shape correlation of a constant series");
    return x.dot(y) / den;
}

double max_significant_error(const std::vector<ReversalSample>& series) {
    double worst = 0;
    for (const auto& s : series) {
        if (s.significant) worst = std::max(worst, s.error);
    }
    return worst;
}

std::string snapshot_table(const ChainModel<double>& model, const WaveField<double>& field) {
    detail::require_same_length(field.size(), model.n_sites());
    std::ostringstream os;
    os << "site,x,re,im,density,region\n";
    const double a = model.units().a;
    for (Index j = 0; j < field.size(); ++j) {
        const auto v = field.amplitudes[j];
        const char* region = model.in_outer(j) ? "outer" : (model.in_cavity(j) ? "cavity" : "probe");
        os << j << ',' << format_double(double(j) * a) << ',' << format_double(v.real()) << ','
           << format_double(v.imag()) << ',' << format_double(std::norm(v)) << ',' << region << '\n';
    }
    return os.str();
}

std::string probe_series_table(const ProtocolReport& report) {
    std::ostringstream os;
    os << "t,probe_density,injection_density,protocol\n";
    const auto& p = report.probe;
    const auto& inj = report.injection;
    const Index first = inj.size() ? static_cast<Index>(std::llround((inj.t0 - p.t0) / p.dt)) : -1;
    for (Index n = 0; n < p.size(); ++n) {
        // the source sample driving the step that starts at t
        const Index m = n - first;
        const double chi = (first >= 0 && m >= 0 && m < inj.size()) ? std::norm(inj.samples[m]) : 0.0;
        os << format_double(p.time(n)) << ',' << format_double(std::norm(p.samples[n])) << ','
           << format_double(chi) << ',' << to_string(report.protocol) << '\n';
    }
    return os.str();
}

std::string reversal_table(const ProtocolReport& report) {
    std::ostringstream os;
    os << "dt,error,cavity_norm,significant\n";
    for (const auto& r : report.reversal) {
        os << format_double(r.dt_offset) << ',' << format_double(r.error) << ',' << format_double(r.cavity_norm)
           << ',' << (r.significant ? 1 : 0) << '\n';
    }
    return os.str();
}

namespace {

std::string complex_series(const char* axis, Index n, auto time_of, auto value_of) {
    std::ostringstream os;
    os << axis << ",re,im\n";
    for (Index i = 0; i < n; ++i) {
        const std::complex<double> v = value_of(i);
        os << format_double(time_of(i)) << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
    }
    return os.str();
}

} // namespace

std::string greens_time_table(const ProbeRecord<double>& response) {
    return complex_series("t", response.size(), [&](Index i) { return response.time(i); },
                          [&](Index i) { return response.samples[i]; });
}

std::string greens_energy_table(const SpectralSignal<double>& spectrum) {
    return complex_series("energy", spectrum.size(), [&](Index i) { return spectrum.grid.energy(i); },
                          [&](Index i) { return spectrum.values[i]; });
}

FileSet export_figures(const ChainModel<double>& model, const ProtocolReport& report) {
    FileSet files;
    const std::string tag = report.protocol == Protocol::PIF ? "pif" : "trm";
    files[tag + "_probe_series.csv"] = probe_series_table(report);
    files[tag + "_reversal.csv"] = reversal_table(report);
    const auto& inj = report.injection;
    files[tag + "_injection.csv"] = complex_series("t", inj.size(), [&](Index m) { return inj.sample_time(m); },
                                                   [&](Index m) { return inj.samples[m]; });
    for (std::size_t i = 0; i < report.snapshots.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%s_snapshot_%02zu.csv", tag.c_str(), i);
        files[name] = snapshot_table(model, report.snapshots[i]);
    }
    return files;
}

} // namespace pif
