/** Parameter form models: client-side validation and request payloads.
 *
 * Each builder returns either the ready-to-POST value or a list of field
 * errors, so the caller can pin every message next to its input.
 */

export interface FieldError {
  field: string;
  message: string;
}

export type FormResult<T> = { ok: true; value: T } | { ok: false; errors: FieldError[] };

export interface DegreeRow {
  degree: string;
  fraction: string;
}

const STRATEGIES = ["default", "twin", "region"] as const;
const LAYOUTS = ["spring", "kamada-kawai", "spectral"] as const;
const CLUSTER_MODES = ["distance", "distance-connectivity"] as const;

function err(field: string, message: string): FieldError {
  return { field, message };
}

/** Parse user degree rows into the service's `d:p` string form. */
export function parseDegreeRows(rows: DegreeRow[]): FormResult<string> {
  const errors: FieldError[] = [];
  const used = rows.filter((r) => r.degree.trim() !== "" || r.fraction.trim() !== "");
  if (used.length === 0) {
    return { ok: false, errors: [err("degrees", "at least one degree row is required")] };
  }
  const pairs: Array<[number, number]> = [];
  const seen = new Set<number>();
  let sum = 0;
  used.forEach((row, i) => {
    const field = `degrees[${i}]`;
    const degree = Number(row.degree);
    const fraction = Number(row.fraction);
    if (!Number.isInteger(degree) || degree < 1) {
      errors.push(err(field, "degree must be a whole number ≥ 1"));
      return;
    }
    if (seen.has(degree)) {
      errors.push(err(field, `degree ${degree} appears twice`));
      return;
    }
    if (!Number.isFinite(fraction) || fraction <= 0 || fraction > 1) {
      errors.push(err(field, "fraction must be in (0, 1]"));
      return;
    }
    seen.add(degree);
    pairs.push([degree, fraction]);
    sum += fraction;
  });
  if (errors.length === 0 && Math.abs(sum - 1) > 0.01) {
    errors.push(err("degrees", `fractions sum to ${sum.toFixed(3)}, expected 1`));
  }
  if (errors.length > 0) {
    return { ok: false, errors };
  }
  return { ok: true, value: pairs.map(([d, p]) => `${d}:${p}`).join(",") };
}

export interface BackboneFormInput {
  strategy: string;
  nodes: string;
  seed?: string;
  layout?: string;
  degreeRows?: DegreeRow[];
  fit?: boolean;
}

export interface BackboneRequestBody {
  strategy: string;
  params: Record<string, unknown>;
}

export function backboneForm(input: BackboneFormInput): FormResult<BackboneRequestBody> {
  const errors: FieldError[] = [];
  if (!(STRATEGIES as readonly string[]).includes(input.strategy)) {
    errors.push(err("strategy", `strategy must be one of ${STRATEGIES.join(", ")}`));
  }
  const nodes = Number(input.nodes);
  if (!Number.isInteger(nodes) || nodes < 1) {
    errors.push(err("nodes", "node count must be a whole number ≥ 1"));
  } else if (input.strategy === "twin" && nodes % 2 !== 0) {
    errors.push(err("nodes", "the twin strategy needs an even node count"));
  }
  const params: Record<string, unknown> = {};
  if (errors.length === 0) {
    params.nodes = nodes;
  }
  if (input.seed !== undefined && input.seed.trim() !== "") {
    const seed = Number(input.seed);
    if (!Number.isInteger(seed) || seed < 0) {
      errors.push(err("seed", "seed must be a whole number ≥ 0"));
    } else {
      params.seed = seed;
    }
  }
  if (input.layout !== undefined && input.layout !== "") {
    if (!(LAYOUTS as readonly string[]).includes(input.layout)) {
      errors.push(err("layout", `layout must be one of ${LAYOUTS.join(", ")}`));
    } else {
      params.layout = input.layout;
    }
  }
  if (input.degreeRows !== undefined) {
    const degrees = parseDegreeRows(input.degreeRows);
    if (degrees.ok) {
      params.degrees = degrees.value;
    } else {
      errors.push(...degrees.errors);
    }
  }
  if (input.fit) {
    params.fit_distances = true;
  }
  if (errors.length > 0) {
    return { ok: false, errors };
  }
  return { ok: true, value: { strategy: input.strategy, params } };
}

export interface ClusterFormInput {
  epsilon: string;
  minPoints?: string;
  mode?: string;
  avoidSingle?: boolean;
}

export interface ClusterRequestBody {
  epsilon: number;
  min_points: number;
  mode: string;
  avoid_single: boolean;
}

export function clusterForm(input: ClusterFormInput): FormResult<ClusterRequestBody> {
  const errors: FieldError[] = [];
  const epsilon = Number(input.epsilon);
  if (!Number.isFinite(epsilon) || epsilon <= 0) {
    errors.push(err("epsilon", "epsilon must be a positive number"));
  }
  let minPoints = 1;
  if (input.minPoints !== undefined && input.minPoints.trim() !== "") {
    minPoints = Number(input.minPoints);
    if (!Number.isInteger(minPoints) || minPoints < 1) {
      errors.push(err("minPoints", "min points must be a whole number ≥ 1"));
    }
  }
  const mode = input.mode === undefined || input.mode === "" ? "distance" : input.mode;
  if (!(CLUSTER_MODES as readonly string[]).includes(mode)) {
    errors.push(err("mode", `mode must be one of ${CLUSTER_MODES.join(", ")}`));
  }
  if (errors.length > 0) {
    return { ok: false, errors };
  }
  return {
    ok: true,
    value: { epsilon, min_points: minPoints, mode, avoid_single: input.avoidSingle ?? false },
  };
}

export interface MetroFormInput {
  clusterLabel: string;
  kind: string;
  nodes?: string;
  nrings?: string;
  seed?: string;
}

export interface MetroRequestBody {
  cluster_label: number;
  kind: "nring" | "mesh";
  params: Record<string, unknown>;
}

export function metroForm(input: MetroFormInput): FormResult<MetroRequestBody> {
  const errors: FieldError[] = [];
  const label = input.clusterLabel.trim() === "" ? Number.NaN : Number(input.clusterLabel);
  if (!Number.isInteger(label) || label < 0) {
    errors.push(err("clusterLabel", "pick a cluster to expand"));
  }
  if (input.kind !== "nring" && input.kind !== "mesh") {
    errors.push(err("kind", "kind must be nring or mesh"));
  }
  const params: Record<string, unknown> = {};
  if (input.kind === "mesh") {
    if (input.nodes === undefined || input.nodes.trim() === "") {
      errors.push(err("nodes", "mesh size is required"));
    } else {
      const nodes = Number(input.nodes);
      if (!Number.isInteger(nodes) || nodes < 1) {
        errors.push(err("nodes", "mesh size must be a whole number ≥ 1"));
      } else {
        params.nodes = nodes;
      }
    }
  }
  if (input.kind === "nring" && input.nrings !== undefined && input.nrings.trim() !== "") {
    const nrings = Number(input.nrings);
    if (!Number.isInteger(nrings) || nrings < 1) {
      errors.push(err("nrings", "ring count must be a whole number ≥ 1"));
    } else {
      params.nrings = nrings;
    }
  }
  if (input.seed !== undefined && input.seed.trim() !== "") {
    const seed = Number(input.seed);
    if (!Number.isInteger(seed) || seed < 0) {
      errors.push(err("seed", "seed must be a whole number ≥ 0"));
    } else {
      params.seed = seed;
    }
  }
  if (errors.length > 0) {
    return { ok: false, errors };
  }
  return { ok: true, value: { cluster_label: label, kind: input.kind as "nring" | "mesh", params } };
}

export interface HorseshoeFormInput {
  end1: string;
  end2: string;
  hops?: string;
}

export interface HorseshoeRequestBody {
  end1: string;
  end2: string;
  hops?: number;
}

export function horseshoeForm(input: HorseshoeFormInput): FormResult<HorseshoeRequestBody> {
  const errors: FieldError[] = [];
  const end1 = input.end1.trim();
  const end2 = input.end2.trim();
  if (end1 === "") {
    errors.push(err("end1", "pick the first end node"));
  }
  if (end2 === "") {
    errors.push(err("end2", "pick the second end node"));
  }
  if (end1 !== "" && end1 === end2) {
    errors.push(err("end2", "the two ends must differ"));
  }
  let hops: number | undefined;
  if (input.hops !== undefined && input.hops.trim() !== "") {
    hops = Number(input.hops);
    if (!Number.isInteger(hops) || hops < 2) {
      errors.push(err("hops", "hop count must be a whole number ≥ 2"));
      hops = undefined;
    }
  }
  if (errors.length > 0) {
    return { ok: false, errors };
  }
  const value: HorseshoeRequestBody = { end1, end2 };
  if (hops !== undefined) {
    value.hops = hops;
  }
  return { ok: true, value };
}
