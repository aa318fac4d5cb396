/*
 * SPDX-License-Identifier: Apache-2.0
 */
#include <ostream>

#include "cecbench/sim.hpp"

namespace cecbench::sim {

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << "slot,event_type,src,dst,task_id,packet_id,outcome\n";
  for (const TraceEvent& e : trace.events) {
    out << e.slot << ',' << event_name(e.type) << ',' << e.src << ',' << e.dst << ',';
    if (e.task_id != kNoTask) out << e.task_id;
    out << ',';
    if (e.packet_id != kNoPacket) out << e.packet_id;
    out << ',' << outcome_name(e.outcome) << '\n';
  }
}

}  // namespace cecbench::sim
