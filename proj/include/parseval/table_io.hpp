#pragma once

// Flat binary and CSV serialisation of function tables.
//
// Binary layout, all fields little-endian:
//
//   offset  size  field
//   0       4     magic "PVTB"
//   4       2     format version (1)
//   6       1     TableKind
//   7       1     scalar type: 0 = int64, 1 = float64
//   8       8     limit N (uint64)
//   16      8     parameter s (IEEE-754 binary64)
//   24      8*N   values f(1), ..., f(N)
//
// CSV starts with one "# parseval-table v1 ..." comment line, then the
// header "n,value" and one row per n.

#include <iosfwd>

#include "parseval/arith_core.hpp"

namespace parseval {

inline constexpr std::uint16_t kTableFormatVersion = 1;

template <typename Scalar>
void write_table_binary(std::ostream& out, const FunctionTable<Scalar>& table);

/// Throws FormatError on a bad magic, version, scalar type or short payload.
template <typename Scalar>
FunctionTable<Scalar> read_table_binary(std::istream& in);

template <typename Scalar>
void write_table_csv(std::ostream& out, const FunctionTable<Scalar>& table);

}  // namespace parseval
