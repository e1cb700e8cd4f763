from openpyxl import Workbook
from openpyxl.styles import Font, PatternFill, Alignment, Border, Side
from openpyxl.utils import get_column_letter
import io

COLUNAS = [
    ('Parâmetro', 'parametro', 36),
    ('Estimativa', 'estimativa', 16),
    ('Erro padrão', 'erro_padrao', 16),
    ('Lotes', 'n_lotes', 8),
    ('Alvo', 'alvo', 16),
    ('Proveniência', 'proveniencia', 20),
    ('Aprovado', 'aprovado', 11),
]


def criar_planilha_resultados(execucao):
    """Planilha com os resultados de uma execução e uma aba com a configuração."""
    wb = Workbook()
    ws = wb.active
    ws.title = "Resultados"

    header_fill = PatternFill(start_color="059669", end_color="059669", fill_type="solid")
    header_font = Font(bold=True, color="FFFFFF", size=11)
    subheader_fill = PatternFill(start_color="10B981", end_color="10B981", fill_type="solid")
    subheader_font = Font(bold=True, color="FFFFFF", size=10)
    falha_fill = PatternFill(start_color="FEE2E2", end_color="FEE2E2", fill_type="solid")
    border = Border(
        left=Side(style='thin'),
        right=Side(style='thin'),
        top=Side(style='thin'),
        bottom=Side(style='thin')
    )

    ultima = get_column_letter(len(COLUNAS))
    ws.merge_cells(f'A1:{ultima}1')
    ws['A1'] = f'EXPERIMENTO {execucao.experimento.upper()} (#{execucao.id})'
    ws['A1'].fill = header_fill
    ws['A1'].font = header_font
    ws['A1'].alignment = Alignment(horizontal='center', vertical='center')

    for col_num, (titulo, _, largura) in enumerate(COLUNAS, 1):
        cell = ws.cell(row=2, column=col_num)
        cell.value = titulo
        cell.fill = subheader_fill
        cell.font = subheader_font
        cell.alignment = Alignment(horizontal='center', vertical='center')
        cell.border = border
        ws.column_dimensions[get_column_letter(col_num)].width = largura

    for row_num, resultado in enumerate(execucao.resultados, 3):
        dados = resultado.to_dict()
        for col_num, (_, chave, _) in enumerate(COLUNAS, 1):
            cell = ws.cell(row=row_num, column=col_num)
            valor = dados[chave]
            cell.value = ('Sim' if valor else 'Não') if chave == 'aprovado' else valor
            cell.border = border
            if isinstance(valor, float):
                cell.number_format = '0.000000E+00'
            cell.alignment = Alignment(horizontal='left' if col_num == 1 else 'center', vertical='center')
            if not resultado.aprovado:
                cell.fill = falha_fill

    ws.row_dimensions[1].height = 25
    ws.row_dimensions[2].height = 20
    ws.freeze_panes = 'A3'

    config_ws = wb.create_sheet("Configuração")
    config_ws['A1'] = 'Campo'
    config_ws['B1'] = 'Valor'
    for cell in (config_ws['A1'], config_ws['B1']):
        cell.fill = header_fill
        cell.font = header_font
        cell.border = border
    linhas = [('impressao_digital', execucao.impressao_digital)]
    linhas += sorted((execucao.configuracao or {}).items())
    for row_num, (campo, valor) in enumerate(linhas, 2):
        config_ws.cell(row=row_num, column=1, value=campo).border = border
        config_ws.cell(row=row_num, column=2,
                       value=', '.join(str(v) for v in valor) if isinstance(valor, list) else valor).border = border
    config_ws.column_dimensions['A'].width = 22
    config_ws.column_dimensions['B'].width = 70

    output = io.BytesIO()
    wb.save(output)
    output.seek(0)
    return output
