// Re-ranking tool: search under a metric, drag-and-drop (or press "t") to
// reorder, generate triplets from the top-10 band, retrain, re-search.

import { fetchModels, listMetrics, rerank, search, trainMetric, ApiError } from "./api.js";
import { TOP_BAND, isPermutationOf, moveItem, moveToTop } from "./ranking.js";

interface RerankState {
  envModel: string;
  targetType: string;
  metric: string;
  order: string[];
  serverOrder: string[];
  dirty: boolean;
  lastSet: string | null;
  user: string;
}

export function setupRerankView(root: HTMLElement): { isDirty: () => boolean } {
  const state: RerankState = {
    envModel: "",
    targetType: "",
    metric: "",
    order: [],
    serverOrder: [],
    dirty: false,
    lastSet: null,
    user: "local",
  };

  root.innerHTML = `
    <div class="controls">
      <label>environment model <select data-role="env"></select></label>
      <label>object type <select data-role="type"></select></label>
      <label>metric <select data-role="metric"></select></label>
      <button data-role="load">search + load list</button>
      <button data-role="generate" disabled>generate triplets</button>
      <button data-role="retrain" disabled>retrain</button>
      <span class="status" data-role="status"></span>
    </div>
    <p class="hint">drag to reorder; hover an item and press "t" to send it to the top.
       The first ${TOP_BAND} rows (highlighted) become the "closest match" band.</p>
    <ol class="rank-list" data-role="list"></ol>
  `;

  const el = {
    env: root.querySelector<HTMLSelectElement>('[data-role="env"]')!,
    type: root.querySelector<HTMLSelectElement>('[data-role="type"]')!,
    metric: root.querySelector<HTMLSelectElement>('[data-role="metric"]')!,
    load: root.querySelector<HTMLButtonElement>('[data-role="load"]')!,
    generate: root.querySelector<HTMLButtonElement>('[data-role="generate"]')!,
    retrain: root.querySelector<HTMLButtonElement>('[data-role="retrain"]')!,
    status: root.querySelector<HTMLElement>('[data-role="status"]')!,
    list: root.querySelector<HTMLOListElement>('[data-role="list"]')!,
  };

  function status(msg: string, isError = false): void {
    el.status.textContent = msg;
    el.status.classList.toggle("error", isError);
  }

  async function populatePickers(): Promise<void> {
    const [{ models }, { metrics }] = await Promise.all([fetchModels(), listMetrics()]);
    el.env.replaceChildren(
      ...models.map((m) => new Option(`${m.id} (${m.object_type})`, m.id)),
    );
    const types = [...new Set(models.map((m) => m.object_type))].sort();
    el.type.replaceChildren(...types.map((t) => new Option(t, t)));
    el.metric.replaceChildren(...metrics.map((m) => new Option(m, m)));
  }

  function render(): void {
    el.list.replaceChildren(
      ...state.order.map((id, idx) => {
        const li = document.createElement("li");
        li.draggable = true;
        li.dataset.id = id;
        li.dataset.index = String(idx);
        li.classList.toggle("top-band", idx < TOP_BAND);
        li.textContent = `${idx + 1}. ${id}`;
        return li;
      }),
    );
    el.generate.disabled = state.order.length === 0;
    el.retrain.disabled = state.lastSet === null;
  }

  function reorder(from: number, to: number): void {
    state.order = moveItem(state.order, from, to);
    if (!isPermutationOf(state.order, state.serverOrder)) {
      // lossless-reorder invariant: never ship a broken list
      state.order = [...state.serverOrder];
      status("reorder lost items; list reset", true);
    }
    state.dirty = true;
    render();
  }

  let dragFrom: number | null = null;
  el.list.addEventListener("dragstart", (ev) => {
    const li = (ev.target as HTMLElement).closest("li");
    if (li) dragFrom = Number(li.dataset.index);
  });
  el.list.addEventListener("dragover", (ev) => ev.preventDefault());
  el.list.addEventListener("drop", (ev) => {
    ev.preventDefault();
    const li = (ev.target as HTMLElement).closest("li");
    if (li && dragFrom !== null) reorder(dragFrom, Number(li.dataset.index));
    dragFrom = null;
  });

  let hovered: number | null = null;
  el.list.addEventListener("mouseover", (ev) => {
    const li = (ev.target as HTMLElement).closest("li");
    hovered = li ? Number(li.dataset.index) : null;
  });
  document.addEventListener("keydown", (ev) => {
    if (ev.key === "t" && hovered !== null && state.order.length > 0) {
      state.order = moveToTop(state.order, hovered);
      state.dirty = true;
      hovered = null;
      render();
    }
  });

  el.load.addEventListener("click", async () => {
    try {
      state.envModel = el.env.value;
      state.targetType = el.type.value;
      state.metric = el.metric.value;
      const resp = await search(state.envModel, state.targetType, state.metric, 0);
      state.serverOrder = resp.ranked.map((r) => r.model_id);
      state.order = [...state.serverOrder];
      state.dirty = false;
      state.lastSet = null;
      status(`ranked ${resp.total} ${state.targetType} models under ${resp.metric_id}`);
      render();
    } catch (err) {
      status(err instanceof ApiError ? err.message : String(err), true);
    }
  });

  el.generate.addEventListener("click", async () => {
    try {
      const resp = await rerank(state.envModel, state.order, state.user);
      state.lastSet = resp.triplet_set;
      state.dirty = false;
      status(`${resp.triplet_count} triplets created (set ${resp.triplet_set})`);
      render();
    } catch (err) {
      status(err instanceof ApiError ? err.message : String(err), true);
    }
  });

  el.retrain.addEventListener("click", async () => {
    if (!state.lastSet) return;
    try {
      const trained = await trainMetric([state.lastSet], "user");
      status(`trained ${trained.metric_id} on ${trained.triplet_count} triplets; re-searching`);
      await populatePickers();
      el.metric.value = trained.metric_id;
      const resp = await search(state.envModel, state.targetType, trained.metric_id, 0);
      state.metric = trained.metric_id;
      state.serverOrder = resp.ranked.map((r) => r.model_id);
      state.order = [...state.serverOrder];
      state.dirty = false;
      render();
    } catch (err) {
      status(err instanceof ApiError ? err.message : String(err), true);
    }
  });

  void populatePickers().catch((err) => status(String(err), true));
  render();
  return { isDirty: () => state.dirty };
}
