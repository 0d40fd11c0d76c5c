#pragma once

#include <string_view>

#include "rcsearch/mol/graph.hpp"

namespace rcs::mol {

// Parses the supported SMILES subset: organic-subset and aromatic atoms,
// bracket atoms (isotope and chirality ignored, H count and charge kept),
// bonds - = # : / \, branches, ring closures (digits and %nn), and '.'.
// Atom ids follow parse order. Errors carry the 0-based character position:
// kEmptyInput, kUnbalancedBranch, kUnmatchedRingBond, kUnknownElement,
// kInvalidSyntax.
MolGraph parse_smiles(std::string_view text);

}  // namespace rcs::mol
