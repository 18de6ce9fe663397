#pragma once
// io.hpp - CSV / JSON serialization of spectra and fit results
//
// Spectrum CSV layout:
//
//   # format=snrlab.spectrum
//   # channel=extinction
//   # ...more key=value metadata...
//   detuning_hz,counts
//   -1.7e+08,1000234
//
// Detunings are written in Hz (delta / 2pi). Floating-point values use 17
// significant digits.

#include "snrlab/fitting.hpp"
#include "snrlab/scan.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace snrlab::io {

void write_spectrum_csv(std::ostream& os, const Spectrum& sp);
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& sp);

/// Reads a spectrum CSV. Metadata lines are optional; without the physical
/// parameter lines `setup` stays empty.
Spectrum read_spectrum_csv(std::istream& is);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

nlohmann::json spectrum_to_json(const Spectrum& sp);
Spectrum spectrum_from_json(const nlohmann::json& doc);

nlohmann::json fit_to_json(const FitResult& fit);
/// Header line matching fit_csv_row().
std::string fit_csv_header();
std::string fit_csv_row(const FitResult& fit);

/// Full-precision decimal rendering used across all machine-readable output.
std::string format_double(double v);

} // namespace snrlab::io
