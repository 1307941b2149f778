#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "geolab/extension.hpp"
#include "geolab/jacobi.hpp"
#include "geolab/splitting.hpp"
#include "geolab/widths.hpp"

namespace geolab {

using Json = nlohmann::ordered_json;

// JSON views of module results. Curve samples are left out; they go to the
// CSV traces instead.
void to_json(Json& j, const Vec3& v);
void to_json(Json& j, const GeodesicCurve& c);
void to_json(Json& j, const SpectrumReport& r);
void to_json(Json& j, const VertexRecord& v);
void to_json(Json& j, const AppendixReport& r);
void to_json(Json& j, const SplitStep& s);
void to_json(Json& j, const VariationReport& r);
void to_json(Json& j, const OneSweepout& s);
void to_json(Json& j, const WidthBound& b);
void to_json(Json& j, const WidthRow& r);
void to_json(Json& j, const FoundGeodesic& f);
void to_json(Json& j, const MkExperimentReport& r);
void to_json(Json& j, const EllipsoidGeodesic& g);
void to_json(Json& j, const MultiplicityRow& r);
void to_json(Json& j, const EllipsoidReport& r);

/// Shortest round-trip decimal form, so identical doubles print identically.
std::string format_double(double x);

std::string width_table_csv(const std::vector<WidthRow>& rows);
std::string eigenvalue_csv(const SpectrumReport& r);
std::string curve_traces_csv(const std::vector<GeodesicCurve>& curves);

/// Curves drawn in chart coordinates (charts) or by stereographic projection
/// of x / |x| from the north pole (level sets).
std::string curves_svg(const Surface& surface, const std::vector<GeodesicCurve>& curves, const std::string& title);

}  // namespace geolab
