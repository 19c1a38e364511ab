"""Vectorized synchronous rounds for all-scalar, all-affine graphs.

Grid problems are thousands of one-dimensional variables joined by unary
and binary affine factors; stepping them edge by edge in Python dominates
the runtime.  This kernel runs the exact same two-phase synchronous round
(including just-in-time robust rescaling and message damping) as array
arithmetic over all edges at once.

The per-edge message dicts on the graph stay the source of truth for every
other code path: between synchronous steps the kernel holds the newest
messages in its arrays and registers itself on the graph; any reader of
per-edge state triggers ``flush_to`` which writes the dicts back.  Results
agree with the generic path up to float summation order.
"""

from __future__ import annotations

import numpy as np

from .gaussian import GaussianCanonical


def applicable(graph) -> bool:
    """True when every variable is scalar and every factor affine with <= 2 ends."""
    for var in graph.variables.values():
        if var.dim != 1:
            return False
    for factor in graph.factors.values():
        if len(factor.neighbors) > 2:
            return False
        model = factor.model
        if not model.affine:
            return False
        if model.robust is not None and (factor._base is None or model.m != 1):
            return False
    return True


class ScalarSyncKernel:
    """Array-form state for one graph, valid for one structure version."""

    def __init__(self, graph):
        self.graph = graph
        self.struct_version = graph._struct_version
        self.values_version = -1
        self.msg_epoch = -1

        self.var_ids = list(graph.variables)
        self.vars = [graph.variables[vid] for vid in self.var_ids]
        index = {vid: i for i, vid in enumerate(self.var_ids)}
        n = len(self.var_ids)
        self.prior_eta = np.zeros(n)
        self.prior_lam = np.zeros(n)
        for i, var in enumerate(self.vars):
            if var.prior is not None:
                self.prior_eta[i] = var.prior.eta[0]
                self.prior_lam[i] = var.prior.lam[0, 0]

        # One directed edge per (factor, adjacent variable).
        self.edge_keys = []   # (factor_id, var_id)
        self.edge_var = []    # variable index
        edge_of = {}
        self.factors = list(graph.factors.values())
        for factor in self.factors:
            for vid in factor.neighbors:
                edge_of[(factor.id, vid)] = len(self.edge_keys)
                self.edge_keys.append((factor.id, vid))
                self.edge_var.append(index[vid])
        self.edge_var = np.array(self.edge_var, dtype=np.intp)
        self.n_edges = len(self.edge_keys)

        self.unary_edges = []           # edge index per unary factor
        self.unary_factors = []
        self.binary_factors = []
        be_own, be_other = [], []
        for factor in self.factors:
            if len(factor.neighbors) == 1:
                self.unary_factors.append(factor)
                self.unary_edges.append(edge_of[(factor.id, factor.neighbors[0])])
            else:
                self.binary_factors.append(factor)
                a, b = factor.neighbors
                be_own.extend([edge_of[(factor.id, a)], edge_of[(factor.id, b)]])
                be_other.extend([edge_of[(factor.id, b)], edge_of[(factor.id, a)]])
        self.unary_edges = np.array(self.unary_edges, dtype=np.intp)
        self.b_own = np.array(be_own, dtype=np.intp)    # 2 entries per binary factor
        self.b_other = np.array(be_other, dtype=np.intp)

        self._load_factor_values()
        self._load_robust_tables()
        self.m_eta = np.zeros(self.n_edges)
        self.m_lam = np.zeros(self.n_edges)
        self._v2f_eta = None
        self._v2f_lam = None

    # -- loading state from the graph ---------------------------------------

    def _load_factor_values(self):
        nu, nb = len(self.unary_factors), len(self.binary_factors)
        self.u_eta = np.empty(nu)
        self.u_lam = np.empty(nu)
        for i, factor in enumerate(self.unary_factors):
            g = factor.gaussian
            self.u_eta[i] = g.eta[0]
            self.u_lam[i] = g.lam[0, 0]
        # Per-directed-edge view of the binary factors: own/other components.
        self.b_e_own = np.empty(2 * nb)
        self.b_e_oth = np.empty(2 * nb)
        self.b_l_own = np.empty(2 * nb)
        self.b_l_oth = np.empty(2 * nb)
        self.b_cross = np.empty(2 * nb)
        for i, factor in enumerate(self.binary_factors):
            g = factor.gaussian
            e0, e1 = g.eta[0], g.eta[1]
            l00, l11, l01 = g.lam[0, 0], g.lam[1, 1], g.lam[0, 1]
            j = 2 * i
            self.b_e_own[j], self.b_e_oth[j] = e0, e1
            self.b_l_own[j], self.b_l_oth[j] = l00, l11
            self.b_e_own[j + 1], self.b_e_oth[j + 1] = e1, e0
            self.b_l_own[j + 1], self.b_l_oth[j + 1] = l11, l00
            self.b_cross[j] = self.b_cross[j + 1] = l01
        self.values_version = self.graph._values_version

    def _load_robust_tables(self):
        # Static per-factor data driving the just-in-time robust rescale.
        ru, rb = [], []
        for i, factor in enumerate(self.unary_factors):
            if factor.model.robust is not None:
                ru.append(i)
        for i, factor in enumerate(self.binary_factors):
            if factor.model.robust is not None:
                rb.append(i)
        self.ru = np.array(ru, dtype=np.intp)
        self.rb = np.array(rb, dtype=np.intp)
        if self.ru.size:
            fac = [self.unary_factors[i] for i in ru]
            self.ru_var = np.array([self.edge_var[self.unary_edges[i]] for i in ru],
                                   dtype=np.intp)
            self.ru_d = np.array([f.model.d_obs[0] for f in fac])
            self.ru_j = np.array([float(f.model.jac(f.linearization_point)[0, 0])
                                  for f in fac])
            self.ru_sig = np.array([np.sqrt(f.model.noise_cov[0, 0]) for f in fac])
            self.ru_t = np.array([f.model.robust.t for f in fac])
            self.ru_be = np.array([f._base.eta[0] for f in fac])
            self.ru_bl = np.array([f._base.lam[0, 0] for f in fac])
            self.ru_lin = np.array([f.linearization_point[0] for f in fac])
        if self.rb.size:
            fac = [self.binary_factors[i] for i in rb]
            index = {vid: i for i, vid in enumerate(self.var_ids)}
            self.rb_va = np.array([index[f.neighbors[0]] for f in fac], dtype=np.intp)
            self.rb_vb = np.array([index[f.neighbors[1]] for f in fac], dtype=np.intp)
            self.rb_d = np.array([f.model.d_obs[0] for f in fac])
            jrows = [f.model.jac(f.linearization_point) for f in fac]
            self.rb_j0 = np.array([j[0, 0] for j in jrows])
            self.rb_j1 = np.array([j[0, 1] for j in jrows])
            self.rb_sig = np.array([np.sqrt(f.model.noise_cov[0, 0]) for f in fac])
            self.rb_t = np.array([f.model.robust.t for f in fac])
            self.rb_be0 = np.array([f._base.eta[0] for f in fac])
            self.rb_be1 = np.array([f._base.eta[1] for f in fac])
            self.rb_bl00 = np.array([f._base.lam[0, 0] for f in fac])
            self.rb_bl01 = np.array([f._base.lam[0, 1] for f in fac])
            self.rb_bl11 = np.array([f._base.lam[1, 1] for f in fac])
            self.rb_lin0 = np.array([f.linearization_point[0] for f in fac])
            self.rb_lin1 = np.array([f.linearization_point[1] for f in fac])

    def _load_messages(self):
        # Always fresh arrays: flushed dict entries hold views into the old
        # ones, which must never change underneath a reader.
        msgs = self.graph._msgs_f2v
        self.m_eta = np.zeros(self.n_edges)
        self.m_lam = np.zeros(self.n_edges)
        for e, key in enumerate(self.edge_keys):
            msg = msgs.get(key)
            if msg is not None:
                self.m_eta[e] = msg.eta[0]
                self.m_lam[e] = msg.lam[0, 0]
        self.msg_epoch = self.graph._msg_epoch

    # -- the synchronous round ------------------------------------------------

    def step(self) -> int:
        graph = self.graph
        if graph._kernel_live is not self or self.msg_epoch != graph._msg_epoch:
            self._load_messages()
        if self.values_version != graph._values_version:
            self._load_factor_values()

        self._beliefs()  # beliefs entering the round drive the rescale check
        self._rescale_robust()

        # Phase 1: variable -> factor on every edge, from pre-round state.
        total_eta = self.prior_eta.copy()
        total_lam = self.prior_lam.copy()
        np.add.at(total_eta, self.edge_var, self.m_eta)
        np.add.at(total_lam, self.edge_var, self.m_lam)
        v_eta = total_eta[self.edge_var] - self.m_eta
        v_lam = total_lam[self.edge_var] - self.m_lam

        # Phase 2: factor -> variable on every edge.
        new_eta = np.empty(self.n_edges)
        new_lam = np.empty(self.n_edges)
        if self.unary_edges.size:
            new_eta[self.unary_edges] = self.u_eta
            new_lam[self.unary_edges] = self.u_lam
        if self.b_own.size:
            e_o = self.b_e_oth + v_eta[self.b_other]
            l_o = self.b_l_oth + v_lam[self.b_other]
            ok = l_o > 0.0
            safe = np.where(ok, l_o, 1.0)
            s_eta = self.b_e_own - self.b_cross * e_o / safe
            s_lam = self.b_l_own - self.b_cross * self.b_cross / safe
            # Fallback for an uninformed eliminated block: the raw factor's
            # own marginal (free drop when uncoupled, else no information).
            raw_ok = self.b_l_oth > 0.0
            raw_safe = np.where(raw_ok, self.b_l_oth, 1.0)
            f_eta = np.where(raw_ok,
                             self.b_e_own - self.b_cross * self.b_e_oth / raw_safe,
                             np.where((self.b_cross == 0.0) & (self.b_e_oth == 0.0),
                                      self.b_e_own, 0.0))
            f_lam = np.where(raw_ok,
                             self.b_l_own - self.b_cross * self.b_cross / raw_safe,
                             np.where((self.b_cross == 0.0) & (self.b_e_oth == 0.0),
                                      self.b_l_own, 0.0))
            free = (~ok) & (self.b_cross == 0.0) & (e_o == 0.0)
            s_eta = np.where(free, self.b_e_own, s_eta)
            s_lam = np.where(free, self.b_l_own, s_lam)
            use_fallback = (~ok) & ~free
            new_eta[self.b_own] = np.where(use_fallback, f_eta, s_eta)
            new_lam[self.b_own] = np.where(use_fallback, f_lam, s_lam)

        beta = graph.damping
        if beta < 1.0:
            new_eta = beta * new_eta + (1.0 - beta) * self.m_eta
            new_lam = beta * new_lam + (1.0 - beta) * self.m_lam
        self.m_eta = new_eta
        self.m_lam = new_lam

        self._v2f_eta = v_eta
        self._v2f_lam = v_lam
        self._beliefs()

        graph._msg_epoch += 1
        self.msg_epoch = graph._msg_epoch
        graph._kernel_live = self
        return 2 * self.n_edges

    def _beliefs(self):
        eta = self.prior_eta.copy()
        lam = self.prior_lam.copy()
        np.add.at(eta, self.edge_var, self.m_eta)
        np.add.at(lam, self.edge_var, self.m_lam)
        self.belief_eta = eta
        self.belief_lam = lam
        mean = np.divide(eta, lam, out=np.full_like(eta, np.nan), where=lam > 0.0)
        for i, var in enumerate(self.vars):
            var._belief = GaussianCanonical._make(eta[i:i + 1], lam[i:i + 1, None])
            var._belief_stale = False
            var._mean = mean[i:i + 1] if lam[i] > 0.0 else None
            var._mean_stale = False

    def _rescale_robust(self):
        graph = self.graph
        thresh = graph.relin_threshold
        changed = False
        if self.ru.size:
            mean = self.belief_eta[self.ru_var] / np.maximum(self.belief_lam[self.ru_var], 1e-300)
            informed = self.belief_lam[self.ru_var] > 0.0
            fire = informed & (np.abs(mean - self.ru_lin) > thresh)
            if fire.any():
                idx = np.nonzero(fire)[0]
                m = np.abs(self.ru_d[idx] - self.ru_j[idx] * mean[idx]) / self.ru_sig[idx]
                t = self.ru_t[idx]
                scale = np.ones_like(m)
                lin = m >= t
                scale[lin] = (2.0 * t[lin] * m[lin] - t[lin] ** 2) / m[lin] ** 2
                self.ru_lin[idx] = mean[idx]
                for k, i in enumerate(idx):
                    fac = self.unary_factors[self.ru[i]]
                    g = GaussianCanonical._make(self.ru_be[i:i + 1] * scale[k],
                                                self.ru_bl[i:i + 1, None] * scale[k])
                    fac.gaussian = g
                    fac.linearization_point = np.array([mean[i]])
                    ui = self.ru[i]
                    self.u_eta[ui] = g.eta[0]
                    self.u_lam[ui] = g.lam[0, 0]
                changed = True
        if self.rb.size:
            la = self.belief_lam[self.rb_va]
            lb = self.belief_lam[self.rb_vb]
            informed = (la > 0.0) & (lb > 0.0)
            ma = self.belief_eta[self.rb_va] / np.maximum(la, 1e-300)
            mb = self.belief_eta[self.rb_vb] / np.maximum(lb, 1e-300)
            drift = np.maximum(np.abs(ma - self.rb_lin0), np.abs(mb - self.rb_lin1))
            fire = informed & (drift > thresh)
            if fire.any():
                idx = np.nonzero(fire)[0]
                r = self.rb_d[idx] - (self.rb_j0[idx] * ma[idx] + self.rb_j1[idx] * mb[idx])
                m = np.abs(r) / self.rb_sig[idx]
                t = self.rb_t[idx]
                scale = np.ones_like(m)
                lin = m >= t
                scale[lin] = (2.0 * t[lin] * m[lin] - t[lin] ** 2) / m[lin] ** 2
                self.rb_lin0[idx] = ma[idx]
                self.rb_lin1[idx] = mb[idx]
                for k, i in enumerate(idx):
                    fac = self.binary_factors[self.rb[i]]
                    eta = np.array([self.rb_be0[i], self.rb_be1[i]]) * scale[k]
                    lam = np.array([[self.rb_bl00[i], self.rb_bl01[i]],
                                    [self.rb_bl01[i], self.rb_bl11[i]]]) * scale[k]
                    g = GaussianCanonical._make(eta, lam)
                    fac.gaussian = g
                    fac.linearization_point = np.array([ma[i], mb[i]])
                    j = 2 * self.rb[i]
                    self.b_e_own[j], self.b_e_oth[j] = eta[0], eta[1]
                    self.b_l_own[j], self.b_l_oth[j] = lam[0, 0], lam[1, 1]
                    self.b_e_own[j + 1], self.b_e_oth[j + 1] = eta[1], eta[0]
                    self.b_l_own[j + 1], self.b_l_oth[j + 1] = lam[1, 1], lam[0, 0]
                    self.b_cross[j] = self.b_cross[j + 1] = lam[0, 1]
                changed = True
        if changed:
            graph._values_version += 1
            self.values_version = graph._values_version

    # -- handing state back to the dicts --------------------------------------

    def flush_to(self, graph) -> None:
        make = GaussianCanonical._make
        f2v = graph._msgs_f2v
        v2f = graph._msgs_v2f
        m_eta, m_lam = self.m_eta, self.m_lam
        for e, (fid, vid) in enumerate(self.edge_keys):
            f2v[(fid, vid)] = make(m_eta[e:e + 1], m_lam[e:e + 1, None])
        if self._v2f_eta is not None:
            v_eta, v_lam = self._v2f_eta, self._v2f_lam
            for e, (fid, vid) in enumerate(self.edge_keys):
                v2f[(vid, fid)] = make(v_eta[e:e + 1], v_lam[e:e + 1, None])


def get_kernel(graph):
    """Return a current kernel for the graph, or None when not applicable."""
    kernel = getattr(graph, "_scalar_kernel", None)
    if kernel is not None and kernel.struct_version == graph._struct_version:
        return kernel
    if not applicable(graph):
        graph._scalar_kernel = None
        return None
    kernel = ScalarSyncKernel(graph)
    graph._scalar_kernel = kernel
    return kernel
