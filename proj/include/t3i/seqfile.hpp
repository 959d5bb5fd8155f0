#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "t3i/oracle.hpp"
#include "t3i/physics.hpp"
#include "t3i/propagator.hpp"
#include "t3i/sequence.hpp"

namespace t3i {

/// Pulse time written as an exact multiple num/den of the parameter T.
struct TimeMultiple {
  long num = 0;
  long den = 1;
  bool operator==(const TimeMultiple&) const = default;
};

struct PulseSpec {
  double time = 0.0;                     // resolved time
  std::optional<TimeMultiple> multiple;  // set when written in terms of T
  double area = 0.0;
  double phase = 0.0;
  int line = 0;

  bool operator==(const PulseSpec& o) const {
    return time == o.time && multiple == o.multiple && area == o.area && phase == o.phase;
  }
};

struct PacketSpec {
  double z0 = 0.0;
  double v0 = 0.0;
  double width = 1.0;
  bool operator==(const PacketSpec&) const = default;
};

/// Parsed sequence file.
///
///   # comment
///   units=natural                      (optional: hbar = mu_B = 1)
///   atom mass=<kg>
///   field g=<m/s^2> B0=<T> gradBz=<T/m>
///   state <label> gF=<float> mF=<int>
///   param T=<s>
///   pulse t=<s | T | 3T | 3/2T> area=<pi/2 | pi | rad> phase=<rad>
///   grid zmin=<m> zmax=<m> n=<int>     (optional, numeric engine)
///   packet z0=<m> v0=<m/s> width=<m>   (optional, initial wave packet)
struct SequenceFile {
  bool natural_units = false;
  AtomConfig atom;
  FieldConfig field;
  std::optional<double> T;
  std::vector<PulseSpec> pulses;
  std::optional<Grid> grid;
  std::optional<PacketSpec> packet;

  PhysicalConstants constants() const {
    return natural_units ? PhysicalConstants::natural() : PhysicalConstants::codata();
  }
  /// Pulses with the accelerations of g1 and g2 in the field.
  InterferometerSequence sequence() const;
  /// The packet line, or a packet at rest at the origin whose width is the
  /// natural length sqrt(hbar t10 / m).
  GaussianPacket initial_packet() const;

  bool operator==(const SequenceFile& o) const;
};

/// Throws ParseError with line and column on syntax and semantic errors.
SequenceFile parse_sequence_file(std::string_view text);

/// Text that parses back to an equal SequenceFile.
std::string format_sequence_file(const SequenceFile& file);

}  // namespace t3i
