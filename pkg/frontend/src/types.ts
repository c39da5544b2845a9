// Wire types mirroring the service's JSON bodies.

/** Per-dimension selection: explicit values, or "*" for every value. */
export type SelectionJson = string[] | "*";

/** {dimension: selection}; omitted dimensions default to "*" server-side. */
export type QueryJson = Record<string, SelectionJson>;

export interface SchemaValue {
  value: string;
  scenario: boolean;
}

export interface SchemaDimension {
  name: string;
  values: SchemaValue[];
}

export interface SchemaView {
  dimensions: SchemaDimension[];
  measures: string[];
  revision: number;
  rowCount: number;
}

export interface UploadResponse {
  rowCount: number;
  revision: number;
}

export interface FactoredQueryView {
  query: QueryJson;
  factors: Record<string, number>;
}

export interface EntryView {
  key: QueryJson;
  values: FactoredQueryView[];
}

export interface ScenarioView {
  value: string;
  dimension: string;
  entries: EntryView[];
}

export interface ScenariosResponse {
  scenarios: ScenarioView[];
  revision: number;
}

export interface EvaluateResponse {
  results: (number | null)[];
  rowCount: number;
  revision: number;
}

export interface RowView {
  coords: Record<string, string>;
  measures: Record<string, number>;
  simulated: boolean;
  provenance?: {
    scenario: string;
    key: QueryJson;
    valueIndex: number;
    rowIndex: number;
  };
}

export interface MaterializeResponse {
  rows: RowView[];
  total: number;
  revision: number;
}

export interface CompareResponse {
  value1: number | null;
  value2: number | null;
  difference: number | null;
  ratio: number | null;
  revision: number;
}
