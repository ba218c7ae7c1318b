#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vwork/control.hpp"
#include "vwork/dynamics.hpp"
#include "vwork/error.hpp"
#include "vwork/geometry.hpp"
#include "vwork/systems.hpp"

namespace vwork {

/// Malformed model file; the message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

struct DynamicsSection {
  LagrangianSpec lagrangian;
  double t0 = 0.0, t1 = 1.0;
  Vec q_start, q_end;
  std::size_t steps = 64;
  /// Constant external force (zero when absent).
  Vec force;
};

/// A parsed model. `parts` holds the named [part ...] systems in file order.
struct Model {
  EuclideanSpace space{1};
  StaticSystem system;
  std::vector<std::pair<std::string, StaticSystem>> parts;
  std::optional<Fibration> fibration;
  std::optional<DynamicsSection> dynamics;
};

/// Format:
///   # comment
///   [space]         dim = 2, optional metric = 1 0; 0 1
///   [system]        type = spring | bilinear | friction | rod | corner | skate |
///                          coulomb | potential-poly | composed | controlled
///   [part NAME]     a system used by composed / controlled (also sphere:
///                   offset, center, radius)
///   [fibration]     projection = matrix rows; optional offset
///   [dynamics]      M, K, c, t0, t1, start, end, N, optional force
/// Vectors are whitespace separated, matrix rows separated by ';'.
/// Unknown sections or keys and duplicate keys are errors.
Model parse_model(std::istream& in);
Model parse_model_file(const std::string& path);

/// Whitespace-separated reals; throws ParseError on anything else.
Vec parse_vector(const std::string& text);
/// Rows separated by ';'.
Mat parse_matrix(const std::string& text);

}  // namespace vwork
