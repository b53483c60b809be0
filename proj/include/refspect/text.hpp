#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace refspect::text {

std::string_view Trim(std::string_view s);
std::string ToUpper(std::string_view s);

// Uppercases, trims and collapses internal whitespace runs to one space.
std::string NormalizeToken(std::string_view s);

std::vector<std::string_view> Split(std::string_view s, char delim);
std::string Join(const std::vector<std::string>& parts, std::string_view sep);

bool IsDigits(std::string_view s);

// Stable 64-bit FNV-1a; used for content-addressed ids and file checksums.
std::uint64_t Fnv1a(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);
std::string Hex64(std::uint64_t v);

std::size_t Levenshtein(std::string_view a, std::string_view b);

// 1 - d / max(|a|, |b|); two empty strings are identical.
double NormalizedLevenshtein(std::string_view a, std::string_view b);

// Fixed-point rendering with at most `digits` decimals and no trailing zeros.
std::string FormatDecimal(double v, int digits = 6);

int CurrentYear();
std::string NowIso8601();

}  // namespace refspect::text
