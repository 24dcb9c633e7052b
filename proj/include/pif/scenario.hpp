#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pif/protocols.hpp"

namespace pif {

enum class ProtocolMode { PIF, TRM, Both };

const char* to_string(ProtocolMode m);
ProtocolMode parse_mode(const std::string& text);

/// A potential segment with site offsets relative to the probe.
struct SegmentSpec {
    Index first = 0;
    Index last = 0;
    double height = 0;
};

/// Everything a run needs, in natural units.
struct Scenario {
    std::string name = "scenario";

    std::optional<Index> padding;        ///< sites left of the probe; auto when empty
    Index padding_margin = 50;
    Index cavity_length = 0;             ///< hard wall at x_s + cavity_length
    std::vector<SegmentSpec> segments;

    double packet_center = 0;            ///< offset from the probe
    double packet_sigma = 0;
    double packet_k0 = 0;

    ProtocolConfig config;
    ProtocolMode mode = ProtocolMode::PIF;

    std::string output_dir;              ///< empty: out/<name>

    Index resolved_padding() const;
    ChainModel<double> build_model() const;
    WaveField<double> build_packet(const ChainModel<double>& model) const;
    void validate() const;
};

/// Strict parser: unknown sections or keys, duplicates and malformed values
/// are ConfigErrors carrying "origin:line:".
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");

/// Reads a file; a missing file raises ScenarioNotFound.
Scenario load_scenario(const std::string& path);

/// Thrown when a scenario or report file does not exist.
class ScenarioNotFound : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Fully resolved scenario text (auto padding expanded, no output directory).
/// Parsing it back yields the same run.
std::string effective_scenario(const Scenario& s);

} // namespace pif
