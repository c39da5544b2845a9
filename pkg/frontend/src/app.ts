// The single-page what-if workbench: upload a cube, define scenarios and see
// their resolved entries, run queries mixing real and scenario values, view
// materialized rows, and compare two queries.
//
// The app holds no cube data beyond the last responses and never aggregates
// locally; every mutation round-trips and then refetches schema + scenarios.

import { ApiClient, ApiRequestError, type FetchLike } from "./api.js";
import { makeDom, type Dom } from "./dom.js";
import { factorsText, fmtNumber, queryText } from "./format.js";
import type {
  EntryView,
  QueryJson,
  RowView,
  ScenarioView,
  SchemaView,
} from "./types.js";

export interface AppOptions {
  baseUrl: string;
  fetchImpl: FetchLike;
  /** Materialized-grid page size. */
  rowLimit?: number;
}

export interface App {
  root: HTMLElement;
  client: ApiClient;
  /** Refetch schema and scenarios and re-render. */
  refresh(): Promise<void>;
  /** Resolves once every in-flight action has settled (for tests). */
  whenIdle(): Promise<void>;
}

interface PickerGroup {
  container: HTMLElement;
  read(): QueryJson;
}

export function createApp(root: HTMLElement, options: AppOptions): App {
  const doc = root.ownerDocument;
  const dom: Dom = makeDom(doc);
  const { el, clear } = dom;
  const client = new ApiClient(options.baseUrl, options.fetchImpl);
  const rowLimit = options.rowLimit ?? 50;

  let schema: SchemaView | null = null;
  let scenarios: ScenarioView[] = [];

  // -- idle tracking (tests await quiescence) -------------------------------

  let pending = 0;
  let idleWaiters: (() => void)[] = [];

  function track(work: Promise<void>): void {
    pending += 1;
    void work.finally(() => {
      pending -= 1;
      if (pending === 0) {
        const waiters = idleWaiters;
        idleWaiters = [];
        for (const resolve of waiters) {
          resolve();
        }
      }
    });
  }

  function whenIdle(): Promise<void> {
    if (pending === 0) {
      return Promise.resolve();
    }
    return new Promise((resolve) => idleWaiters.push(resolve));
  }

  function run(action: () => Promise<void>): void {
    hideError();
    track(
      action().catch((err) => {
        showError(err);
      }),
    );
  }

  // -- error banner ----------------------------------------------------------

  const errorBanner = el("div", { id: "error-banner", class: "banner hidden" });

  function showError(err: unknown): void {
    errorBanner.textContent =
      err instanceof ApiRequestError
        ? `${err.code}: ${err.message}`
        : String(err);
    errorBanner.classList.remove("hidden");
  }

  function hideError(): void {
    errorBanner.textContent = "";
    errorBanner.classList.add("hidden");
  }

  // -- upload section ----------------------------------------------------------

  const csvInput = el("textarea", {
    id: "csv-input",
    rows: "7",
    placeholder: "CSV with a header row",
  });
  const dimsInput = el("input", {
    id: "dims-input",
    placeholder: "dimension columns, comma-separated",
  });
  const measuresInput = el("input", {
    id: "measures-input",
    placeholder: "measure columns, comma-separated",
  });
  const uploadButton = el("button", { id: "upload-btn" }, "Upload cube");
  const cubeStatus = el("span", { id: "cube-status" }, "no cube loaded");

  uploadButton.addEventListener("click", () =>
    run(async () => {
      await client.uploadCube(
        splitList(dimsInput.value),
        splitList(measuresInput.value),
        csvInput.value,
      );
      await refresh();
    }),
  );

  // -- scenario editor ---------------------------------------------------------

  const scenarioValueInput = el("input", {
    id: "scenario-value",
    placeholder: "new value, e.g. 2012",
  });
  const scenarioDimensionSelect = el("select", { id: "scenario-dimension" });
  const scenarioCreateButton = el(
    "button",
    { id: "scenario-create" },
    "Create scenario",
  );
  const scenarioList = el("div", { id: "scenario-list" });

  scenarioCreateButton.addEventListener("click", () =>
    run(async () => {
      await client.createScenario(
        scenarioValueInput.value.trim(),
        scenarioDimensionSelect.value,
      );
      scenarioValueInput.value = "";
      await refresh();
    }),
  );

  function renderScenarios(): void {
    clear(scenarioList);
    if (!schema) {
      return;
    }
    if (scenarios.length === 0) {
      scenarioList.append(el("p", { class: "muted" }, "No scenarios yet."));
      return;
    }
    for (const scenario of scenarios) {
      scenarioList.append(renderScenarioCard(scenario));
    }
  }

  function renderScenarioCard(scenario: ScenarioView): HTMLElement {
    const measures = schema!.measures;

    const deleteButton = el(
      "button",
      { class: "delete-scenario" },
      "Delete scenario",
    );
    deleteButton.addEventListener("click", () =>
      run(async () => {
        await client.deleteScenario(scenario.value);
        await refresh();
      }),
    );

    const entriesHost = el("div", { class: "entries" });
    if (scenario.entries.length === 0) {
      entriesHost.append(
        el("p", { class: "muted" }, "No queries associated yet."),
      );
    }
    for (const entry of scenario.entries) {
      entriesHost.append(renderEntry(scenario, entry));
    }

    return el(
      "div",
      { class: "scenario-card", "data-scenario": scenario.value },
      el(
        "h3",
        {},
        el("span", { class: "scenario-name" }, scenario.value),
        el("span", { class: "muted" }, ` on ${scenario.dimension} `),
        deleteButton,
      ),
      entriesHost,
      renderAddQueryForm(scenario, measures),
    );
  }

  function renderEntry(scenario: ScenarioView, entry: EntryView): HTMLElement {
    const dims = schema!.dimensions.map((d) => d.name);
    const measures = schema!.measures;

    const removeButton = el("button", { class: "remove-entry" }, "Remove");
    removeButton.addEventListener("click", () =>
      run(async () => {
        await client.removeEntry(scenario.value, entry.key);
        await refresh();
      }),
    );

    const valuesHost = el("div", { class: "entry-values" });
    entry.values.forEach((fq, index) => {
      const factorInputs = new Map<string, HTMLInputElement>();
      const editor = el("span", { class: "factor-editor" });
      for (const m of measures) {
        const input = el("input", {
          class: "factor-input",
          "data-measure": m,
          size: "6",
        });
        input.value = fmtNumber(fq.factors[m] ?? 1);
        factorInputs.set(m, input);
        editor.append(
          el("label", { class: "factor" }, el("span", {}, ` ${m} ×`), input),
        );
      }
      const applyButton = el("button", { class: "apply-factors" }, "Apply");
      applyButton.addEventListener("click", () =>
        run(async () => {
          await client.updateFactors(
            scenario.value,
            entry.key,
            index,
            readFactors(factorInputs),
          );
          await refresh();
        }),
      );
      valuesHost.append(
        el(
          "div",
          { class: "entry-value" },
          el("span", { class: "muted" }, "from "),
          el("code", { class: "value-query" }, queryText(fq.query, dims)),
          el(
            "span",
            { class: "value-factors" },
            ` × ${factorsText(fq.factors, measures)} `,
          ),
          editor,
          applyButton,
        ),
      );
    });

    return el(
      "div",
      { class: "entry" },
      el(
        "div",
        { class: "entry-key" },
        el("span", { class: "muted" }, "key "),
        el("code", {}, queryText(entry.key, dims)),
        removeButton,
      ),
      valuesHost,
    );
  }

  function renderAddQueryForm(
    scenario: ScenarioView,
    measures: string[],
  ): HTMLElement {
    const picker = buildPickerGroup(`add-${scenario.value}`);
    const factorInputs = new Map<string, HTMLInputElement>();
    const factorsHost = el("div", { class: "factors" });
    for (const m of measures) {
      const input = el("input", {
        class: "factor-input",
        "data-measure": m,
        size: "6",
        value: "1",
      });
      factorInputs.set(m, input);
      factorsHost.append(
        el("label", { class: "factor" }, el("span", {}, `${m} ×`), input),
      );
    }
    const addButton = el("button", { class: "add-query" }, "Add query");
    const updateSubmittable = () => {
      addButton.disabled = ![...factorInputs.values()].every((input) => {
        const raw = input.value.trim();
        return raw === "" || Number.isFinite(Number(raw));
      });
    };
    for (const input of factorInputs.values()) {
      input.addEventListener("input", updateSubmittable);
    }
    addButton.addEventListener("click", () =>
      run(async () => {
        await client.addScenarioQuery(
          scenario.value,
          picker.read(),
          readFactors(factorInputs),
        );
        await refresh();
      }),
    );
    return el(
      "div",
      { class: "add-query-form" },
      el("h4", {}, "Associate a query"),
      picker.container,
      factorsHost,
      addButton,
    );
  }

  function readFactors(
    inputs: Map<string, HTMLInputElement>,
  ): Record<string, number> {
    const factors: Record<string, number> = {};
    for (const [measure, input] of inputs) {
      const raw = input.value.trim();
      if (raw !== "") {
        factors[measure] = Number(raw);
      }
    }
    return factors;
  }

  // -- query runner -------------------------------------------------------------

  const queryPickersHost = el("div", { id: "query-pickers" });
  const aggFnSelect = el("select", { id: "agg-fn" });
  const aggExprSelect = el("select", { id: "agg-expr" });
  const showRowsToggle = el("input", { id: "show-rows", type: "checkbox" });
  const runQueryButton = el("button", { id: "run-query" }, "Run query");
  const queryResult = el("div", { id: "query-result", class: "panel" });
  const rowGrid = el("div", { id: "row-grid" });
  let queryPicker: PickerGroup | null = null;

  runQueryButton.addEventListener("click", () =>
    run(async () => {
      if (!queryPicker) {
        return;
      }
      const query = queryPicker.read();
      const spec = currentSpec(aggFnSelect, aggExprSelect);
      const evaluation = await client.evaluate(query, [spec]);
      clear(queryResult);
      queryResult.append(
        el(
          "div",
          { class: "metric" },
          el(
            "span",
            { class: "value", id: "query-value" },
            fmtNumber(evaluation.results[0]),
          ),
          el("span", { class: "label" }, ` ${spec}`),
        ),
        el(
          "div",
          { class: "muted" },
          `${evaluation.rowCount} matching rows (revision ${evaluation.revision})`,
        ),
      );
      clear(rowGrid);
      if (showRowsToggle.checked) {
        const grid = await client.materialize(query, rowLimit);
        renderRowGrid(grid.rows, grid.total);
      }
    }),
  );

  function renderRowGrid(rows: RowView[], total: number): void {
    if (!schema) {
      return;
    }
    const dims = schema.dimensions.map((d) => d.name);
    const measures = schema.measures;
    const head = el(
      "tr",
      {},
      ...dims.map((d) => el("th", {}, d)),
      ...measures.map((m) => el("th", { class: "num" }, m)),
      el("th", {}, "origin"),
    );
    const body = rows.map((row) =>
      el(
        "tr",
        { class: row.simulated ? "simulated" : "" },
        ...dims.map((d) => el("td", {}, row.coords[d] ?? "")),
        ...measures.map((m) =>
          el("td", { class: "num" }, fmtNumber(row.measures[m])),
        ),
        el(
          "td",
          { class: "muted" },
          row.simulated && row.provenance
            ? `simulated via ${row.provenance.scenario}`
            : "real",
        ),
      ),
    );
    rowGrid.append(
      el(
        "div",
        { class: "muted" },
        `${total} rows total, showing ${rows.length}`,
      ),
      el("table", {}, head, ...body),
    );
  }

  // -- compare --------------------------------------------------------------------

  const compareAHost = el("div", { id: "compare-a" });
  const compareBHost = el("div", { id: "compare-b" });
  const compareFnSelect = el("select", { id: "compare-fn" });
  const compareExprSelect = el("select", { id: "compare-expr" });
  const compareButton = el("button", { id: "run-compare" }, "Compare");
  const compareResult = el("div", { id: "compare-result", class: "panel" });
  let comparePickerA: PickerGroup | null = null;
  let comparePickerB: PickerGroup | null = null;

  compareButton.addEventListener("click", () =>
    run(async () => {
      if (!comparePickerA || !comparePickerB) {
        return;
      }
      const spec = currentSpec(compareFnSelect, compareExprSelect);
      const result = await client.compare(
        comparePickerA.read(),
        comparePickerB.read(),
        spec,
      );
      clear(compareResult);
      compareResult.append(
        el(
          "div",
          { class: "variance" },
          metric("compare-value1", "A", result.value1),
          metric("compare-value2", "B", result.value2),
          metric("compare-diff", "difference", result.difference),
          metric("compare-ratio", "ratio", result.ratio),
        ),
        el("div", { class: "muted" }, spec),
      );
    }),
  );

  function metric(id: string, label: string, value: number | null): HTMLElement {
    return el(
      "div",
      { class: "metric" },
      el("span", { class: "value", id }, fmtNumber(value)),
      el("span", { class: "label" }, ` ${label}`),
    );
  }

  // -- pickers and aggregation options ----------------------------------------------

  function buildPickerGroup(idPrefix: string): PickerGroup {
    const container = el("div", { class: "picker-group" });
    const selects = new Map<string, HTMLSelectElement>();
    if (schema) {
      for (const dim of schema.dimensions) {
        const select = el("select", {
          id: `${idPrefix}-${dim.name}`,
          multiple: "multiple",
          size: String(Math.min(6, Math.max(2, dim.values.length))),
        });
        for (const v of dim.values) {
          const option = el(
            "option",
            { value: v.value },
            v.scenario ? `${v.value} (scenario)` : v.value,
          );
          if (v.scenario) {
            option.classList.add("scenario-value");
          }
          select.append(option);
        }
        selects.set(dim.name, select);
        container.append(
          el(
            "label",
            { class: "picker" },
            el("span", {}, `${dim.name} `),
            select,
          ),
        );
      }
    }
    return {
      container,
      read(): QueryJson {
        const query: QueryJson = {};
        for (const [dim, select] of selects) {
          const chosen = Array.from(select.options)
            .filter((o) => o.selected)
            .map((o) => o.value);
          if (chosen.length > 0) {
            query[dim] = chosen;
          }
        }
        return query;
      },
    };
  }

  function expressionOptions(measures: string[]): string[] {
    const options = [...measures];
    for (let i = 0; i < measures.length; i += 1) {
      for (let j = i + 1; j < measures.length; j += 1) {
        options.push(`${measures[i]}*${measures[j]}`);
      }
    }
    return options;
  }

  function fillSelect(select: HTMLSelectElement, values: string[]): void {
    const previous = select.value;
    clear(select);
    for (const v of values) {
      select.append(el("option", { value: v }, v));
    }
    if (values.includes(previous)) {
      select.value = previous;
    }
  }

  function currentSpec(
    fnSelect: HTMLSelectElement,
    exprSelect: HTMLSelectElement,
  ): string {
    const fn = fnSelect.value || "sum";
    return fn === "count" ? "count" : `${fn}:${exprSelect.value}`;
  }

  // -- refresh and render --------------------------------------------------------------

  async function refresh(): Promise<void> {
    schema = await client.schema();
    scenarios = (await client.scenarios()).scenarios;
    renderAll();
  }

  function renderAll(): void {
    if (!schema) {
      return;
    }
    cubeStatus.textContent = `${schema.rowCount} rows, revision ${schema.revision}`;

    fillSelect(
      scenarioDimensionSelect,
      schema.dimensions.map((d) => d.name),
    );
    const exprs = expressionOptions(schema.measures);
    for (const fnSelect of [aggFnSelect, compareFnSelect]) {
      fillSelect(fnSelect, ["sum", "count", "avg", "min", "max"]);
    }
    fillSelect(aggExprSelect, exprs);
    fillSelect(compareExprSelect, exprs);

    queryPicker = buildPickerGroup("query");
    clear(queryPickersHost);
    queryPickersHost.append(queryPicker.container);

    comparePickerA = buildPickerGroup("compare-a");
    comparePickerB = buildPickerGroup("compare-b");
    clear(compareAHost);
    compareAHost.append(comparePickerA.container);
    clear(compareBHost);
    compareBHost.append(comparePickerB.container);

    renderScenarios();
  }

  // -- skeleton -----------------------------------------------------------------------

  root.append(
    el("h1", {}, "What-if workbench"),
    errorBanner,
    el(
      "section",
      { id: "upload-section" },
      el("h2", {}, "Cube ", cubeStatus),
      csvInput,
      el("div", { class: "row" }, dimsInput, measuresInput, uploadButton),
    ),
    el(
      "section",
      { id: "scenario-section" },
      el("h2", {}, "Scenarios"),
      el(
        "div",
        { class: "row" },
        scenarioValueInput,
        scenarioDimensionSelect,
        scenarioCreateButton,
      ),
      scenarioList,
    ),
    el(
      "section",
      { id: "query-section" },
      el("h2", {}, "Query"),
      queryPickersHost,
      el(
        "div",
        { class: "row" },
        aggFnSelect,
        aggExprSelect,
        el("label", {}, showRowsToggle, " show rows"),
        runQueryButton,
      ),
      queryResult,
      rowGrid,
    ),
    el(
      "section",
      { id: "compare-section" },
      el("h2", {}, "Compare"),
      el(
        "div",
        { class: "compare-sides" },
        el("div", {}, el("h4", {}, "A"), compareAHost),
        el("div", {}, el("h4", {}, "B"), compareBHost),
      ),
      el("div", { class: "row" }, compareFnSelect, compareExprSelect, compareButton),
      compareResult,
    ),
  );

  return { root, client, refresh, whenIdle };
}

function splitList(text: string): string[] {
  return text
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0);
}
