/** Wire types for the prediction service and the request payload builder. */

export interface PredictionRequest {
  bl_ors: number;
  bl_srs: number;
  third_delta_ors: number;
  third_delta_srs: number;
  gender: string;
  diag_cat: string;
  age: number;
  payor_grp: string;
  county: string;
  region_type: string;
  q_case_mgmt_bin: number;
  q_medical_bin: number;
  q_therapy_bin: number;
  q_ind_therapy_bin: number;
  q_grp_therapy_bin: number;
  state: string;
  is_new: number;
  model: string;
}

export interface ReliableChangeBand {
  mean_delta: number;
  improve_above: number;
  deteriorate_below: number;
  category_at_mean: string;
}

export interface PredictionResponse {
  model: string;
  probability_above_mean_improvement: number;
  reliable_change_band: ReliableChangeBand;
  model_fingerprint: string;
  pipeline_fingerprint: string;
}

export interface ModelInfo {
  name: string;
  algorithm: string;
  binning: string;
  cv_auc: number | null;
  cv_accuracy: number | null;
}

export type Transport = (url: string, body: unknown) => Promise<PredictionResponse>;

/** Default transport over fetch; non-2xx responses reject with the detail. */
export function fetchTransport(fetchImpl: typeof fetch = fetch): Transport {
  return async (url, body) => {
    const response = await fetchImpl(url, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      const text = await response.text();
      throw new Error(`service error ${response.status}: ${text}`);
    }
    return (await response.json()) as PredictionResponse;
  };
}

export async function fetchModels(baseUrl: string, fetchImpl: typeof fetch = fetch): Promise<ModelInfo[]> {
  const response = await fetchImpl(`${baseUrl}/models`);
  if (!response.ok) {
    throw new Error(`service error ${response.status}`);
  }
  return (await response.json()) as ModelInfo[];
}
