#ifndef PEXMAP_JSON_IO_HPP
#define PEXMAP_JSON_IO_HPP

#include <string>
#include <vector>

#include "pexmap/coupling.hpp"
#include "pexmap/hofbauer.hpp"
#include "pexmap/map_model.hpp"
#include "pexmap/standard_family.hpp"
#include "pexmap/statistics.hpp"

namespace pexmap {

// map spec: {"family":"vssv","params":{"lambda":0.4},"truncation":60,"iterate":1}
MapModel load_map_spec(const std::string& path);
MapModel parse_map_spec(const std::string& json_text);

// family spec: [{"support":[a,b],"density":"uniform","weight":w}, ...]
// or density as [{"left":..,"right":..,"value":..}, ...]
StandardFamily load_family_spec(const std::string& path);
StandardFamily parse_family_spec(const std::string& json_text);

// observable spec: {"kind":"power_singularity","tau":0.3} etc.
ObservableSpec load_observable_spec(const std::string& path);
ObservableSpec parse_observable_spec(const std::string& json_text);

// two-column-and-up CSV with 17 significant digits
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
std::string format_full(double v);

void write_density_csv(const std::string& path, const PiecewiseDensity& d);
void write_tower_json(const std::string& path, const Tower& t);
void write_ledger_csv(const std::string& path, const CouplingLedger& ledger);

} // namespace pexmap

#endif
