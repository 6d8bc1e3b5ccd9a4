// Style search explorer: query + metric picker with a ranked thumbnail
// strip, and a side-by-side comparison of two metrics for the same query.

import { fetchModels, listMetrics, search, ApiError, SearchResponse } from "./api.js";

export function setupSearchView(root: HTMLElement): void {
  root.innerHTML = `
    <div class="controls">
      <label>query <select data-role="query"></select></label>
      <label>result type <select data-role="type"></select></label>
      <label>metric A <select data-role="metric-a"></select></label>
      <label>metric B <select data-role="metric-b"></select></label>
      <label>k <input data-role="k" type="number" value="5" min="1" max="50" /></label>
      <button data-role="go">search</button>
      <span class="status" data-role="status"></span>
    </div>
    <section>
      <h3 data-role="title-a"></h3>
      <div class="result-strip" data-role="results-a"></div>
      <h3 data-role="title-b"></h3>
      <div class="result-strip" data-role="results-b"></div>
    </section>
  `;

  const el = {
    query: root.querySelector<HTMLSelectElement>('[data-role="query"]')!,
    type: root.querySelector<HTMLSelectElement>('[data-role="type"]')!,
    metricA: root.querySelector<HTMLSelectElement>('[data-role="metric-a"]')!,
    metricB: root.querySelector<HTMLSelectElement>('[data-role="metric-b"]')!,
    k: root.querySelector<HTMLInputElement>('[data-role="k"]')!,
    go: root.querySelector<HTMLButtonElement>('[data-role="go"]')!,
    status: root.querySelector<HTMLElement>('[data-role="status"]')!,
    titleA: root.querySelector<HTMLElement>('[data-role="title-a"]')!,
    titleB: root.querySelector<HTMLElement>('[data-role="title-b"]')!,
    resultsA: root.querySelector<HTMLElement>('[data-role="results-a"]')!,
    resultsB: root.querySelector<HTMLElement>('[data-role="results-b"]')!,
  };

  function status(msg: string, isError = false): void {
    el.status.textContent = msg;
    el.status.classList.toggle("error", isError);
  }

  function renderStrip(target: HTMLElement, resp: SearchResponse): void {
    if (resp.ranked.length === 0) {
      target.textContent = "no results for this query/type";
      return;
    }
    target.replaceChildren(
      ...resp.ranked.map((r, i) => {
        const card = document.createElement("figure");
        card.className = "candidate";
        const img = document.createElement("img");
        img.loading = "lazy";
        img.src = `/thumbnails/${r.model_id}.png`;
        img.alt = r.model_id;
        img.addEventListener("error", () => img.classList.add("missing"));
        const cap = document.createElement("figcaption");
        cap.textContent = `${i + 1}. ${r.model_id} (d=${r.distance.toFixed(4)})`;
        card.append(img, cap);
        return card;
      }),
    );
  }

  el.go.addEventListener("click", async () => {
    const k = Number(el.k.value) || 5;
    try {
      const a = await search(el.query.value, el.type.value, el.metricA.value, k);
      el.titleA.textContent = `metric ${a.metric_id}`;
      renderStrip(el.resultsA, a);
      if (el.metricB.value && el.metricB.value !== el.metricA.value) {
        const b = await search(el.query.value, el.type.value, el.metricB.value, k);
        el.titleB.textContent = `metric ${b.metric_id}`;
        renderStrip(el.resultsB, b);
        const diff = a.ranked.filter((r, i) => b.ranked[i]?.model_id !== r.model_id).length;
        status(`orderings differ at ${diff} of ${Math.min(a.ranked.length, b.ranked.length)} positions`);
      } else {
        el.titleB.textContent = "";
        el.resultsB.replaceChildren();
        status(`top ${a.ranked.length} of ${a.total}`);
      }
    } catch (err) {
      status(err instanceof ApiError ? err.message : String(err), true);
    }
  });

  void Promise.all([fetchModels(), listMetrics()])
    .then(([{ models }, { metrics }]) => {
      el.query.replaceChildren(
        ...models.map((m) => new Option(`${m.id} (${m.object_type})`, m.id)),
      );
      const types = [...new Set(models.map((m) => m.object_type))].sort();
      el.type.replaceChildren(...types.map((t) => new Option(t, t)));
      el.metricA.replaceChildren(...metrics.map((m) => new Option(m, m)));
      el.metricB.replaceChildren(new Option("(none)", ""), ...metrics.map((m) => new Option(m, m)));
    })
    .catch((err) => status(String(err), true));
}
