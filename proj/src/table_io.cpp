#include "parseval/table_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <type_traits>

#include <fmt/format.h>

namespace parseval {

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'V', 'T', 'B'};

template <typename Scalar>
constexpr std::uint8_t scalar_code() {
  if constexpr (std::is_same_v<Scalar, std::int64_t>) {
    return 0;
  } else {
    static_assert(std::is_same_v<Scalar, double>);
    return 1;
  }
}

void put_le(std::ostream& out, std::uint64_t value, int bytes) {
  char buffer[8];
  for (int i = 0; i < bytes; ++i) {
    buffer[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(buffer, bytes);
}

std::uint64_t get_le(std::istream& in, int bytes) {
  unsigned char buffer[8] = {};
  in.read(reinterpret_cast<char*>(buffer), bytes);
  if (in.gcount() != bytes) throw FormatError("table file truncated");
  std::uint64_t value = 0;
  for (int i = 0; i < bytes; ++i) {
    value |= static_cast<std::uint64_t>(buffer[i]) << (8 * i);
  }
  return value;
}

template <typename Scalar>
std::uint64_t to_bits(Scalar v) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return std::bit_cast<std::uint64_t>(v);
  } else {
    return static_cast<std::uint64_t>(v);
  }
}

template <typename Scalar>
Scalar from_bits(std::uint64_t bits) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<std::int64_t>(bits);
  }
}

}  // namespace

template <typename Scalar>
void write_table_binary(std::ostream& out, const FunctionTable<Scalar>& table) {
  out.write(kMagic.data(), kMagic.size());
  put_le(out, kTableFormatVersion, 2);
  put_le(out, static_cast<std::uint8_t>(table.kind()), 1);
  put_le(out, scalar_code<Scalar>(), 1);
  put_le(out, table.limit(), 8);
  put_le(out, std::bit_cast<std::uint64_t>(table.parameter()), 8);
  for (std::uint64_t n = 1; n <= table.limit(); ++n) {
    put_le(out, to_bits(table(n)), 8);
  }
}

template <typename Scalar>
FunctionTable<Scalar> read_table_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kMagic) {
    throw FormatError("not a parseval table (bad magic)");
  }
  const auto version = get_le(in, 2);
  if (version != kTableFormatVersion) {
    throw FormatError(fmt::format("unsupported table version {}", version));
  }
  const auto kind = get_le(in, 1);
  if (kind > static_cast<std::uint8_t>(TableKind::constant)) {
    throw FormatError(fmt::format("unknown table kind code {}", kind));
  }
  const auto code = get_le(in, 1);
  if (code != scalar_code<Scalar>()) {
    throw FormatError("table scalar type does not match the requested type");
  }
  const std::uint64_t limit = get_le(in, 8);
  const double parameter = std::bit_cast<double>(get_le(in, 8));
  if (limit == 0) throw FormatError("table limit is zero");
  typename FunctionTable<Scalar>::Vector values(limit + 1);
  values(0) = Scalar(0);
  for (std::uint64_t n = 1; n <= limit; ++n) {
    values(n) = from_bits<Scalar>(get_le(in, 8));
  }
  return {static_cast<TableKind>(kind), limit, parameter, std::move(values)};
}

template <typename Scalar>
void write_table_csv(std::ostream& out, const FunctionTable<Scalar>& table) {
  out << fmt::format("# parseval-table v1 kind={} N={} s={}\n",
                     to_string(table.kind()), table.limit(), table.parameter());
  out << "n,value\n";
  for (std::uint64_t n = 1; n <= table.limit(); ++n) {
    out << fmt::format("{},{}\n", n, table(n));
  }
}

template void write_table_binary(std::ostream&, const IntegerTable&);
template void write_table_binary(std::ostream&, const RealTable&);
template IntegerTable read_table_binary<std::int64_t>(std::istream&);
template RealTable read_table_binary<double>(std::istream&);
template void write_table_csv(std::ostream&, const IntegerTable&);
template void write_table_csv(std::ostream&, const RealTable&);

}  // namespace parseval
