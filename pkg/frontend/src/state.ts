/**
 * Client-side view of the graph. The view is stateless with respect to
 * inference: every number here came out of a SessionEvent, and applying an
 * event touches exactly the nodes it lists.
 */

import { BeliefPayload, FactorState, SessionEvent, SessionState } from "./protocol.js";

export interface NodeView {
  id: string;
  dim: number;
  mean: number[] | null;
  cov: number[][] | null;
  /** Singular belief: rendered in the distinct "uninformed" style. */
  uninformed: boolean;
  /** Where to draw the node before its belief exists (layout hint). */
  initial: number[] | null;
  selected: boolean;
}

export class GraphView {
  nodes = new Map<string, NodeView>();
  factors: FactorState[] = [];
  damping = 0.7;
  policyKind = "synchronous";
  lastDelta: number | null = null;
  lastEnergy: number | null = null;
  messagesTotal = 0;

  /** Replace everything from a full get_state snapshot. */
  applyState(state: SessionState): void {
    const fresh = new Map<string, NodeView>();
    for (const [id, v] of Object.entries(state.variables)) {
      const old = this.nodes.get(id);
      fresh.set(id, {
        id,
        dim: v.dim,
        mean: v.mean,
        cov: v.cov,
        uninformed: v.mean === null,
        initial: v.initial,
        selected: old?.selected ?? false,
      });
    }
    this.nodes = fresh;
    this.factors = state.factors;
    this.damping = state.damping;
    this.policyKind = state.policy.kind;
  }

  /**
   * Apply one event's state_delta. Returns the ids whose view changed;
   * throws if the engine mentions a node the view has never heard of (a
   * protocol break, not a display concern).
   */
  applyEvent(event: SessionEvent): string[] {
    if (event.status !== "ok") return [];
    this.lastDelta = event.delta;
    this.lastEnergy = event.total_energy;
    this.messagesTotal += event.messages_sent;
    if (event.state) this.applyState(event.state);
    const changed: string[] = [];
    for (const [id, belief] of Object.entries(event.state_delta)) {
      const node = this.nodes.get(id);
      if (!node) {
        throw new Error(`state_delta names unknown node ${id}`);
      }
      this.update(node, belief);
      changed.push(id);
    }
    return changed;
  }

  private update(node: NodeView, belief: BeliefPayload): void {
    node.mean = belief.mean;
    node.cov = belief.cov;
    node.uninformed = belief.mean === null;
  }

  /** For drawing: current mean when informed, else the layout hint. */
  position(id: string): number[] | null {
    const node = this.nodes.get(id);
    if (!node) return null;
    if (node.mean !== null && node.mean.length >= 2) return node.mean;
    if (node.mean !== null) return [node.mean[0] ?? 0, 0];
    if (node.initial !== null && node.initial.length >= 2) return node.initial;
    if (node.initial !== null) return [node.initial[0] ?? 0, 0];
    return null;
  }

  select(id: string | null): void {
    for (const node of this.nodes.values()) node.selected = node.id === id;
  }
}
