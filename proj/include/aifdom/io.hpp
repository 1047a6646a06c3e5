#pragma once

// JSON and CSV exchange formats for regions, certificates, verification
// reports, spectra and frequency loci.

#include "aifdom/dominance.hpp"
#include "aifdom/ode_sim.hpp"
#include "aifdom/regions.hpp"
#include "aifdom/spectral.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace aifdom {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Vector vector_from_json(const Json& j);
Json to_json(const Interval& iv);
Interval interval_from_json(const Json& j);

Json to_json(const Region& r);
Region region_from_json(const Json& j);

/// Certificate schema: p, lambda, epsilon, P (rows), region, residual_margin,
/// checked_points. A certificate without a region has an empty polytope.
Json to_json(const DominanceCertificate& c);
DominanceCertificate certificate_from_json(const Json& j);

Json to_json(const VerificationReport& r);
Json to_json(const AttractorReport& r);
Json to_json(const Classification& c);

/// Nyquist sidecar: everything but the sampled values.
Json locus_sidecar(const FrequencyLocus& l);
/// `omega,re,im` rows on the shifted axis.
void write_locus_csv(std::ostream& os, const FrequencyLocus& l);

/// `which_vertex,re_1,im_1,...,re_n,im_n`.
void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumSample>& samples);

/// `gain,trace,re,im`.
void write_root_locus_csv(std::ostream& os, const RootLocus& rl);

std::string read_text_file(const std::string& path);
Json read_json_file(const std::string& path);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace aifdom
