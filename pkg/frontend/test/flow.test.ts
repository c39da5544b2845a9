// End-to-end analyst flow against the real backend service: upload the
// four-row sourcing cube, build the SU3 and 2012 scenarios through the
// editor, check the resolved entry appears on screen, run the 2012 query,
// and compare 2011 against 2012.

import { spawn, type ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { Window } from "happy-dom";
import { afterAll, beforeAll, expect, it } from "vitest";

import { createApp, type App } from "../src/app.js";

const CSV = `Year,Supplier,Product,Volume,Cost
2011,SU1,P1,10,1.0
2011,SU1,P2,11,1.5
2011,SU2,P1,12,1.1
2011,SU2,P2,13,1.4
`;

let service: ChildProcess;
let baseUrl: string;
let window: Window;
let app: App;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address && typeof address === "object") {
        const { port } = address;
        probe.close(() => resolve(port));
      } else {
        reject(new Error("no port assigned"));
      }
    });
  });
}

async function waitForService(url: string, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      await fetch(`${url}/api/schema`);
      return; // any HTTP response (409 NO_CUBE included) means it is up
    } catch (err) {
      lastError = err;
      await sleep(150);
    }
  }
  throw new Error(`service did not come up: ${lastError}`);
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function byId<T extends HTMLElement = HTMLElement>(id: string): T {
  const node = window.document.getElementById(id);
  if (!node) {
    throw new Error(`no element #${id}`);
  }
  return node as unknown as T;
}

function setValue(id: string, value: string): void {
  byId<HTMLInputElement | HTMLTextAreaElement>(id).value = value;
}

function click(id: string): void {
  byId(id).click();
}

function pick(selectId: string, ...values: string[]): void {
  const select = byId<HTMLSelectElement>(selectId);
  for (const option of Array.from(select.options)) {
    option.selected = values.includes(option.value);
  }
}

function setSelect(id: string, value: string): void {
  byId<HTMLSelectElement>(id).value = value;
}

function scenarioCard(value: string): HTMLElement {
  const card = window.document.querySelector(`[data-scenario="${value}"]`);
  if (!card) {
    throw new Error(`no scenario card for ${value}`);
  }
  return card as unknown as HTMLElement;
}

function clickWithin(rootEl: HTMLElement, selector: string): void {
  const node = rootEl.querySelector(selector);
  if (!node) {
    throw new Error(`nothing matches ${selector}`);
  }
  (node as unknown as HTMLElement).click();
}

function setFactors(
  form: HTMLElement,
  factors: Record<string, string>,
): void {
  for (const input of Array.from(form.querySelectorAll(".factor-input"))) {
    const measure = (input as unknown as HTMLElement).getAttribute(
      "data-measure",
    );
    if (measure && measure in factors) {
      (input as unknown as HTMLInputElement).value = factors[measure];
    }
  }
}

async function settle(): Promise<void> {
  await app.whenIdle();
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  service = spawn(
    "python3",
    ["-m", "whatif_cube.service", "--host", "127.0.0.1", "--port", String(port)],
    { stdio: "ignore" },
  );
  await waitForService(baseUrl);

  window = new Window({ url: baseUrl });
  const root = window.document.createElement("div");
  window.document.body.appendChild(root);
  app = createApp(root as unknown as HTMLElement, {
    baseUrl,
    fetchImpl: (input, init) => fetch(input, init),
  });
});

afterAll(async () => {
  service?.kill("SIGTERM");
  await window?.happyDOM.close();
});

it("runs the full analyst flow against the live service", async () => {
  // 1. upload the cube
  setValue("csv-input", CSV);
  setValue("dims-input", "Year,Supplier,Product");
  setValue("measures-input", "Volume,Cost");
  click("upload-btn");
  await settle();
  expect(byId("cube-status").textContent).toContain("4 rows");

  // 2. create SU3 on Supplier and associate the discounted SU2 block
  setValue("scenario-value", "SU3");
  setSelect("scenario-dimension", "Supplier");
  click("scenario-create");
  await settle();
  const su3 = scenarioCard("SU3");
  pick("add-SU3-Year", "2011");
  pick("add-SU3-Supplier", "SU2");
  pick("add-SU3-Product", "P1", "P2");
  setFactors(su3, { Volume: "1", Cost: "0.9" });
  clickWithin(su3, ".add-query");
  await settle();
  expect(scenarioCard("SU3").textContent).toContain("SU2,SU3");

  // 3. create 2012 on Year: SU1 block doubled, SU3 block tripled
  setValue("scenario-value", "2012");
  setSelect("scenario-dimension", "Year");
  click("scenario-create");
  await settle();

  let card2012 = scenarioCard("2012");
  pick("add-2012-Year", "2011");
  pick("add-2012-Supplier", "SU1");
  pick("add-2012-Product", "P1", "P2");
  setFactors(card2012, { Volume: "2", Cost: "1" });
  clickWithin(card2012, ".add-query");
  await settle();

  card2012 = scenarioCard("2012");
  pick("add-2012-Year", "2011");
  pick("add-2012-Supplier", "SU3"); // the scenario value, badged in the picker
  pick("add-2012-Product", "P1", "P2");
  setFactors(card2012, { Volume: "3", Cost: "1" });
  clickWithin(card2012, ".add-query");
  await settle();

  // 4. the resolved entry is visible: the SU3-keyed entry shows the real
  //    SU2 query with the composed cost factor 0.9
  const entryText = scenarioCard("2012").textContent ?? "";
  expect(entryText).toContain("Year=2011,2012; Supplier=SU3; Product=P1,P2");
  expect(entryText).toContain("Year=2011; Supplier=SU2; Product=P1,P2");
  expect(entryText).toContain("Cost=0.9");

  // 5. run the 2012 plan query: sum Volume*Cost = 137.78
  pick("query-Year", "2012");
  pick("query-Supplier", "SU1", "SU3");
  pick("query-Product", "P1", "P2");
  setSelect("agg-fn", "sum");
  setSelect("agg-expr", "Volume*Cost");
  click("run-query");
  await settle();
  expect(byId("query-value").textContent).toBe("137.78");

  // 6. compare 2011 actuals against the 2012 plan: difference 79.88
  pick("compare-a-Year", "2011");
  pick("compare-a-Supplier", "SU1", "SU2");
  pick("compare-a-Product", "P1", "P2");
  pick("compare-b-Year", "2012");
  pick("compare-b-Supplier", "SU1", "SU3");
  pick("compare-b-Product", "P1", "P2");
  setSelect("compare-fn", "sum");
  setSelect("compare-expr", "Volume*Cost");
  click("run-compare");
  await settle();
  expect(byId("compare-value1").textContent).toBe("57.9");
  expect(byId("compare-value2").textContent).toBe("137.78");
  expect(byId("compare-diff").textContent).toBe("79.88");

  // the error banner stayed hidden throughout
  expect(byId("error-banner").classList.contains("hidden")).toBe(true);
});

it("renders service error codes verbatim", async () => {
  // duplicate scenario name -> NAME_COLLISION shown inline
  setValue("scenario-value", "SU3");
  setSelect("scenario-dimension", "Supplier");
  click("scenario-create");
  await settle();
  const banner = byId("error-banner");
  expect(banner.classList.contains("hidden")).toBe(false);
  expect(banner.textContent).toContain("NAME_COLLISION");
});

it("disables scenario-query submit while a factor is not a number", async () => {
  const card = scenarioCard("SU3");
  const input = card.querySelector(
    '.add-query-form .factor-input[data-measure="Volume"]',
  ) as unknown as HTMLInputElement;
  const button = card.querySelector(
    ".add-query",
  ) as unknown as HTMLButtonElement;
  expect(button.disabled).toBe(false);
  input.value = "not a number";
  input.dispatchEvent(new window.Event("input", { bubbles: true }));
  expect(button.disabled).toBe(true);
  input.value = "1.5";
  input.dispatchEvent(new window.Event("input", { bubbles: true }));
  expect(button.disabled).toBe(false);
});

it("shows materialized rows with simulated provenance", async () => {
  const toggle = byId<HTMLInputElement>("show-rows");
  toggle.checked = true;
  pick("query-Year", "2012");
  pick("query-Supplier", "SU1", "SU3");
  pick("query-Product", "P1", "P2");
  setSelect("agg-fn", "count");
  click("run-query");
  await settle();
  const grid = byId("row-grid").textContent ?? "";
  expect(grid).toContain("4 rows total");
  expect(grid).toContain("simulated via 2012");
});
