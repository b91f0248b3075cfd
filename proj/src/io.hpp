#pragma once

#include <string>
#include <vector>

#include "client_model.hpp"
#include "orchestrator.hpp"

namespace ufg {

// Writes to <path>.tmp in the same directory, then renames over the target,
// so rerunning never leaves a partially written file behind.
void atomic_write_file(const std::string& path, const std::string& content);

std::string format_metrics_csv(const std::vector<RoundMetrics>& rounds);
std::string format_graph_dump_tsv(const std::vector<GraphDumpRow>& rows);

// Versioned little-endian binary dump of every client's tensors.
std::string format_snapshot(const std::vector<ClientModelParams>& clients);

}  // namespace ufg
