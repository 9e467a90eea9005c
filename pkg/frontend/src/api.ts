/** Typed JSON client for the topology service.
 *
 * Every mutation round-trips through HTTP; the UI never edits topology
 * state locally, so these responses are the single source of truth.
 */

export interface NodeRow {
  name: string;
  type: string;
  x: number | null;
  y: number | null;
  cluster: number | null;
  reference_node: string;
  segment: string;
  color?: string;
}

export interface LinkRow {
  source: string;
  target: string;
  length_km: number;
  segment: string;
}

export interface TopologyPayload {
  nodes: NodeRow[];
  links: LinkRow[];
  warnings?: string[];
}

export interface StructurePayload extends TopologyPayload {
  structure_id: string;
}

export interface ClustersPayload {
  clusters: Record<string, string[]>;
  transit_label: number | null;
  warnings?: string[];
}

export interface StatsPayload {
  degree_target: Record<string, number>;
  degree_achieved: Record<string, number>;
  degree_mape: number | null;
  degree_other: number;
  distance_target: Record<string, number>;
  distance_achieved: Record<string, number>;
  distance_mape: number | null;
  distance_other: number;
}

export interface SessionInfo {
  id: string;
  nodes: number;
  links: number;
}

export interface ClusterRequest {
  epsilon: number;
  min_points?: number;
  mode?: string;
  avoid_single?: boolean;
}

export interface MetroRequest {
  cluster_label: number;
  kind: "nring" | "mesh";
  params?: Record<string, unknown>;
}

export interface HorseshoeRequest {
  end1: string;
  end2: string;
  hops?: number;
  params?: Record<string, unknown>;
}

/** Server error envelope, carrying the machine-readable code. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly offenders?: string[],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Client {
  private readonly base: string;
  private readonly doFetch: FetchLike;

  constructor(base: string, fetchImpl?: FetchLike) {
    this.base = base.replace(/\/+$/, "");
    const impl = fetchImpl ?? fetch;
    this.doFetch = (input, init) => impl(input, init);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { accept: "application/json" } };
    if (body !== undefined) {
      init.headers = { ...init.headers, "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.doFetch(this.base + path, init);
    if (!res.ok) {
      throw await toApiError(res);
    }
    return (await res.json()) as T;
  }

  createSession(seed = 0, workbook?: unknown): Promise<SessionInfo> {
    return this.request("POST", "/sessions", workbook === undefined ? { seed } : { seed, workbook });
  }

  generateBackbone(
    session: string,
    strategy: string,
    params: Record<string, unknown>,
  ): Promise<TopologyPayload> {
    return this.request("POST", `/sessions/${session}/backbone`, { strategy, params });
  }

  topology(session: string): Promise<TopologyPayload> {
    return this.request("GET", `/sessions/${session}/topology`);
  }

  stats(session: string, query?: { degrees?: string; ranges?: string }): Promise<StatsPayload> {
    const q = new URLSearchParams();
    if (query?.degrees) q.set("degrees", query.degrees);
    if (query?.ranges) q.set("ranges", query.ranges);
    const suffix = q.size > 0 ? `?${q.toString()}` : "";
    return this.request("GET", `/sessions/${session}/stats${suffix}`);
  }

  addLink(session: string, source: string, target: string, lengthKm: number): Promise<TopologyPayload> {
    return this.request("POST", `/sessions/${session}/links`, {
      source,
      target,
      length_km: lengthKm,
    });
  }

  deleteLink(session: string, a: string, b: string): Promise<TopologyPayload> {
    return this.request(
      "DELETE",
      `/sessions/${session}/links/${encodeURIComponent(a)}/${encodeURIComponent(b)}`,
    );
  }

  assignClusters(session: string, req: ClusterRequest): Promise<ClustersPayload> {
    return this.request("POST", `/sessions/${session}/clusters`, req);
  }

  clusters(session: string): Promise<ClustersPayload> {
    return this.request("GET", `/sessions/${session}/clusters`);
  }

  generateMetro(session: string, req: MetroRequest): Promise<StructurePayload> {
    return this.request("POST", `/sessions/${session}/metro`, req);
  }

  generateHorseshoe(session: string, req: HorseshoeRequest): Promise<StructurePayload> {
    return this.request("POST", `/sessions/${session}/horseshoe`, req);
  }

  undo(session: string): Promise<TopologyPayload> {
    return this.request("POST", `/sessions/${session}/undo`);
  }

  /** JSON or SVG export as text (exact server bytes, usable for downloads). */
  async exportText(session: string, format: "json" | "svg"): Promise<string> {
    const res = await this.doFetch(`${this.base}/sessions/${session}/export?format=${format}`);
    if (!res.ok) {
      throw await toApiError(res);
    }
    return res.text();
  }

  /** CSV export arrives as a zip of the workbook tables. */
  async exportZip(session: string): Promise<ArrayBuffer> {
    const res = await this.doFetch(`${this.base}/sessions/${session}/export?format=csv`);
    if (!res.ok) {
      throw await toApiError(res);
    }
    return res.arrayBuffer();
  }
}

async function toApiError(res: Response): Promise<ApiError> {
  let code = "http-error";
  let message = `${res.status} ${res.statusText}`;
  let offenders: string[] | undefined;
  try {
    const body = (await res.json()) as { error?: { code?: string; message?: string; offenders?: string[] } };
    if (body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
      offenders = body.error.offenders;
    }
  } catch {
    // keep the generic message for non-JSON bodies
  }
  return new ApiError(res.status, code, message, offenders);
}
